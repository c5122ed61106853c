mod common;

use common::random_feasible;
use patternforge::generators::{params_for, Generator};
use patternforge::{derive_params, generate_angie, generate_ars, generate_bag, generate_js, validate_pattern, GeneratorKind, RandomSource};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check_angie(case: &common::FeasibleCase, sigma2: f64, seed: u64) -> Result<(), String> {
    let d = derive_params(&case.config).map_err(|e| format!("{case:?}: {e}"))?;
    assert_eq!((d.k_grid, d.k_req), (case.k_grid, case.k_req), "{case:?}");
    for i in 0..10 {
        let p = generate_angie(&d, sigma2, &mut RandomSource::new(seed, i)).unwrap();
        let idx = p.indices();
        if idx.len() != d.k_req as usize {
            return Err(format!("{case:?} sigma2={sigma2}: {} points", idx.len()));
        }
        if idx.iter().any(|&n| n < 1 || n > d.k_grid) {
            return Err(format!("{case:?}: index outside grid in {idx:?}"));
        }
        for w in idx.windows(2) {
            let gap = w[1] as i64 - w[0] as i64;
            if gap < d.k_min as i64 || d.k_max.is_some_and(|m| gap > m as i64) {
                return Err(format!("{case:?} sigma2={sigma2}: gap {gap} in {idx:?}"));
            }
        }
        if validate_pattern(&p, &d).gamma {
            return Err(format!("{case:?}: verdict disagrees"));
        }
    }
    Ok(())
}

#[test]
fn angie_fuzz_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA461E);
    let sigmas = [0.0, 1e-4, 1e-2, 1.0, 1e2, 1e6];
    for i in 0..1_000u64 {
        let case = random_feasible(&mut rng, 3_000);
        check_angie(&case, sigmas[i as usize % sigmas.len()], i).unwrap();
    }
}

#[test]
fn angie_tight_configs() {
    // Exactly enough room: points forced onto a comb.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let mut case = random_feasible(&mut rng, 500);
        let period = case.k_grid / case.k_req;
        case.config.t_min = Some(period as f64 * common::T_GRID);
        case.config.t_max = Some(case.k_grid.div_ceil(case.k_req) as f64 * common::T_GRID);
        case.k_min = Some(period);
        check_angie(&case, 10.0, 1).unwrap();
    }
}

#[test]
fn zero_variance_js_ars_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5160);
    for i in 0..50 {
        let case = random_feasible(&mut rng, 5_000);
        let cfg = case.config.with_sigma2(0.0);
        let d = params_for(GeneratorKind::Js, &cfg).unwrap();
        // Uniform points k * n_avg that fit the grid.
        let uniform: Vec<u32> =
            (1..=d.k_req).map(|k| k * d.n_avg).filter(|&n| n >= 1 && n <= d.k_grid).collect();
        let mut src = RandomSource::new(i, 0);
        assert_eq!(generate_js(&d, 0.0, &mut src).indices(), &uniform[..], "{case:?}");
        assert_eq!(generate_ars(&d, 0.0, &mut src).indices(), &uniform[..], "{case:?}");
    }
}

#[test]
fn js_ars_emit_valid_patterns() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..300u64 {
        let case = random_feasible(&mut rng, 2_000);
        for kind in [GeneratorKind::Js, GeneratorKind::Ars] {
            let sigma2 = [1e-3, 1.0, 1e3][i as usize % 3];
            let d = params_for(kind, &case.config).unwrap();
            let g = Generator::prepare(kind, &d, sigma2).unwrap();
            let p = g.generate_nth(i, 0);
            // Pattern::new re-checks range and strict order.
            patternforge::Pattern::new(p.indices().to_vec(), d.k_grid, d.t_grid).unwrap();
            assert!(p.len() <= d.k_req as usize);
        }
    }
}

#[test]
fn bags_are_reproducible_and_schedule_independent() {
    let cfg = patternforge::experiments::experiment1_config().with_sigma2(1e-2);
    for kind in GeneratorKind::ALL {
        let a = generate_bag(kind, &cfg, 300, 42).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| generate_bag(kind, &cfg, 300, 42).unwrap());
        assert_eq!(a.patterns, b.patterns);
        let c = generate_bag(kind, &cfg, 300, 43).unwrap();
        assert_ne!(a.patterns, c.patterns);
        // Pattern i depends on (seed, i) only.
        let d = generate_bag(kind, &cfg, 10, 42).unwrap();
        assert_eq!(&a.patterns[..10], &d.patterns[..]);
    }
}
