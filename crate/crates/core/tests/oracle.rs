mod common;

use common::{close, naive_report, naive_verdict, Limits};
use patternforge::evaluation::{MetricAccumulator, UniqueTracking};
use patternforge::{validate_pattern, DerivedParams, Pattern};
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;

fn params(lim: &Limits) -> DerivedParams {
    DerivedParams {
        k_grid: lim.k_grid,
        t_grid: 1e-6,
        tau_hat: lim.k_grid as f64 * 1e-6,
        k_req: lim.k_req,
        f_hat: 0.0,
        t_hat: 0.0,
        n_avg: lim.k_grid / lim.k_req,
        k_min: lim.k_min,
        k_max: lim.k_max,
    }
}

fn limits(max_grid: u32) -> impl Strategy<Value = Limits> {
    (1..=max_grid).prop_flat_map(|k_grid| {
        (Just(k_grid), 1..=k_grid, 1..=k_grid, proptest::option::of(1..=k_grid))
            .prop_map(|(k_grid, k_req, k_min, k_max)| Limits { k_grid, k_req, k_min, k_max })
    })
}

fn pattern_on(k_grid: u32, max_len: usize) -> impl Strategy<Value = Vec<u32>> {
    btree_set(1..=k_grid, 0..=max_len.min(k_grid as usize)).prop_map(|s| s.into_iter().collect())
}

fn bag_strategy() -> impl Strategy<Value = (Limits, Vec<Vec<u32>>)> {
    limits(16).prop_flat_map(|lim| {
        // Few distinct patterns on a small grid, so duplicates occur.
        let bag = vec(pattern_on(lim.k_grid, 6), 1..=100);
        (Just(lim), bag)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn verdict_matches_naive((lim, idx) in limits(12).prop_flat_map(|l| (Just(l), pattern_on(l.k_grid, 6)))) {
        let p = Pattern::new(idx.clone(), lim.k_grid, 1e-6).unwrap();
        let v = validate_pattern(&p, &params(&lim));
        let n = naive_verdict(&idx, &lim);
        prop_assert_eq!(
            (v.gamma_f, v.gamma_min, v.gamma_max, v.gamma, v.frac_under, v.frac_over),
            (n.gamma_f, n.gamma_min, n.gamma_max, n.gamma, n.frac_under, n.frac_over)
        );
    }

    #[test]
    fn metrics_match_naive((lim, bag) in bag_strategy()) {
        let d = params(&lim);
        let mut acc = MetricAccumulator::new(&d);
        for idx in &bag {
            let p = Pattern::new(idx.clone(), lim.k_grid, 1e-6).unwrap();
            acc.accumulate(&p, &validate_pattern(&p, &d)).unwrap();
        }
        let got = acc.finalize().unwrap();
        let want = naive_report(&bag, &lim);
        let tol = 1e-12;
        for (name, a, b) in [
            ("e_f", got.e_f, want.e_f),
            ("gamma_f", got.gamma_f, want.gamma_f),
            ("e_min", got.e_min, want.e_min),
            ("e_max", got.e_max, want.e_max),
            ("gamma_min", got.gamma_min, want.gamma_min),
            ("gamma_max", got.gamma_max, want.gamma_max),
            ("gamma", got.gamma, want.gamma),
        ] {
            prop_assert!(close(a, b, tol), "{}: {} vs {}", name, a, b);
        }
        for (name, a, b) in [("e_p", got.e_p, want.e_p), ("e_p_star", got.e_p_star, want.e_p_star)] {
            match (a, b) {
                (Some(a), Some(b)) => prop_assert!(close(a, b, tol), "{}: {} vs {}", name, a, b),
                _ => prop_assert_eq!(a, b, "{}", name),
            }
        }
        prop_assert_eq!((got.eta, got.eta_star, got.n), (want.eta, want.eta_star, bag.len() as u64));
    }

    #[test]
    fn merge_equals_sequential((lim, bag) in bag_strategy(), cut_a in 0usize..100, cut_b in 0usize..100) {
        let d = params(&lim);
        let items: Vec<_> = bag
            .iter()
            .map(|idx| {
                let p = Pattern::new(idx.clone(), lim.k_grid, 1e-6).unwrap();
                let v = validate_pattern(&p, &d);
                (p, v)
            })
            .collect();
        let (a, b) = (cut_a.min(cut_b).min(items.len()), cut_a.max(cut_b).min(items.len()));
        let fill = |range: &[(Pattern, patternforge::PatternVerdict)]| {
            let mut acc = MetricAccumulator::new(&d);
            for (p, v) in range {
                acc.accumulate(p, v).unwrap();
            }
            acc
        };
        let whole = fill(&items);
        // (x + y) + z and x + (y + z)
        let mut left = fill(&items[..a]);
        left.merge(fill(&items[a..b])).unwrap();
        left.merge(fill(&items[b..])).unwrap();
        let mut tail = fill(&items[a..b]);
        tail.merge(fill(&items[b..])).unwrap();
        let mut right = fill(&items[..a]);
        right.merge(tail).unwrap();
        let (w, l, r) = (whole.finalize().unwrap(), left.finalize().unwrap(), right.finalize().unwrap());
        for x in [&l, &r] {
            prop_assert_eq!((x.eta, x.eta_star, x.n), (w.eta, w.eta_star, w.n));
            prop_assert_eq!((x.gamma, x.gamma_f, x.gamma_min, x.gamma_max), (w.gamma, w.gamma_f, w.gamma_min, w.gamma_max));
            prop_assert_eq!((x.e_p, x.e_p_star), (w.e_p, w.e_p_star));
            prop_assert!(close(x.e_f, w.e_f, 1e-12) && close(x.e_min, w.e_min, 1e-12) && close(x.e_max, w.e_max, 1e-12));
        }
    }

    #[test]
    fn fingerprint_mode_agrees_on_small_bags((lim, bag) in bag_strategy()) {
        let d = params(&lim);
        let mut confirmed = MetricAccumulator::new(&d);
        let mut hashed = MetricAccumulator::new(&d).with_tracking(UniqueTracking::Fingerprint);
        for idx in &bag {
            let p = Pattern::new(idx.clone(), lim.k_grid, 1e-6).unwrap();
            let v = validate_pattern(&p, &d);
            confirmed.accumulate(&p, &v).unwrap();
            hashed.accumulate(&p, &v).unwrap();
        }
        prop_assert_eq!(confirmed.finalize().unwrap(), hashed.finalize().unwrap());
        prop_assert_eq!(confirmed.collisions(), 0);
    }
}

#[test]
fn occurrence_sums_to_grid_size() {
    let lim = Limits { k_grid: 8, k_req: 3, k_min: 2, k_max: None };
    let d = params(&lim);
    let mut acc = MetricAccumulator::new(&d);
    for idx in [vec![1, 3, 5], vec![2, 4, 8], vec![1, 2]] {
        let p = Pattern::new(idx, 8, 1e-6).unwrap();
        acc.accumulate(&p, &validate_pattern(&p, &d)).unwrap();
    }
    let p_g = acc.occurrence(false).unwrap();
    assert!((p_g.iter().sum::<f64>() - 8.0).abs() < 1e-12);
    // 8 points in all; grid point 1 appears twice
    assert_eq!(p_g[0], 2.0);
    let star = acc.occurrence(true).unwrap();
    assert!((star.iter().sum::<f64>() - 8.0).abs() < 1e-12);
    assert_eq!(star[7], 8.0 / 6.0);
}
