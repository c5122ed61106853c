//! Generation throughput against the requested sampling frequency.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::SamplingConfig;
use crate::generators::{params_for, Generator, GeneratorKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchPoint {
    pub generator: GeneratorKind,
    pub f_req: f64,
    pub k_req: u32,
    pub patterns: u64,
    pub seconds: f64,
    pub patterns_per_second: f64,
}

/// Times the generation of `n` patterns. Patterns are generated and dropped;
/// the total point count is kept so the work cannot be skipped.
pub fn time_generation(kind: GeneratorKind, cfg: &SamplingConfig, n: u64, seed: u64) -> Result<BenchPoint, crate::Error> {
    let d = params_for(kind, cfg)?;
    let generator = Generator::prepare(kind, &d, cfg.sigma2)?;
    let start = Instant::now();
    let points: u64 = (0..n).into_par_iter().map(|i| generator.generate_nth(seed, i).len() as u64).sum();
    let seconds = start.elapsed().as_secs_f64();
    std::hint::black_box(points);
    Ok(BenchPoint {
        generator: kind,
        f_req: cfg.f_req,
        k_req: d.k_req,
        patterns: n,
        seconds,
        patterns_per_second: if seconds > 0.0 { n as f64 / seconds } else { f64::INFINITY },
    })
}

/// Throughput at each of `freqs`, all other settings taken from `base`.
pub fn bench_scaling(
    kind: GeneratorKind,
    base: &SamplingConfig,
    freqs: &[f64],
    n: u64,
    seed: u64,
) -> Result<Vec<BenchPoint>, crate::Error> {
    freqs
        .iter()
        .map(|&f| {
            let mut cfg = *base;
            cfg.f_req = f;
            time_generation(kind, &cfg, n, seed)
        })
        .collect()
}
