//! Shared helpers for the integration tests: a literal, slow re-statement of
//! the bag metrics and a generator of random feasible configurations.
#![allow(dead_code)]

use std::collections::BTreeSet;

use patternforge::SamplingConfig;
use rand::Rng;

/// Spacing limits used by the naive checks.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub k_grid: u32,
    pub k_req: u32,
    pub k_min: u32,
    pub k_max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveVerdict {
    pub gamma_f: bool,
    pub gamma_min: bool,
    pub gamma_max: bool,
    pub gamma: bool,
    pub frac_under: f64,
    pub frac_over: f64,
}

pub fn naive_verdict(indices: &[u32], lim: &Limits) -> NaiveVerdict {
    let gaps: Vec<i64> = (1..indices.len()).map(|i| indices[i] as i64 - indices[i - 1] as i64).collect();
    let short = gaps.iter().filter(|&&g| g < lim.k_min as i64).count();
    let long = match lim.k_max {
        Some(m) => gaps.iter().filter(|&&g| g > m as i64).count(),
        None => 0,
    };
    let frac = |c: usize| if gaps.is_empty() { 0.0 } else { c as f64 / gaps.len() as f64 };
    let gamma_f = indices.len() != lim.k_req as usize;
    NaiveVerdict {
        gamma_f,
        gamma_min: short > 0,
        gamma_max: long > 0,
        gamma: gamma_f || short > 0 || long > 0,
        frac_under: frac(short),
        frac_over: frac(long),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveReport {
    pub e_f: f64,
    pub gamma_f: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma: f64,
    pub e_p: Option<f64>,
    pub e_p_star: Option<f64>,
    pub eta: u64,
    pub eta_star: u64,
}

/// Grid usage uniformity, straight from the definition: for each grid point,
/// count the patterns that contain it.
fn naive_pdf_error(bag: &[&Vec<u32>], k_grid: u32) -> Option<f64> {
    let total: usize = bag.iter().map(|p| p.len()).sum();
    if total == 0 {
        return None;
    }
    let mut sum = 0.0;
    for m in 1..=k_grid {
        let used = bag.iter().filter(|p| p.contains(&m)).count();
        let p_g = k_grid as f64 / total as f64 * used as f64;
        sum += (p_g - 1.0).powi(2);
    }
    Some(sum / k_grid as f64)
}

pub fn naive_report(bag: &[Vec<u32>], lim: &Limits) -> NaiveReport {
    let n = bag.len() as f64;
    let verdicts: Vec<NaiveVerdict> = bag.iter().map(|p| naive_verdict(p, lim)).collect();
    let mean = |f: &dyn Fn(usize) -> f64| (0..bag.len()).map(f).sum::<f64>() / n;
    let share = |f: &dyn Fn(&NaiveVerdict) -> bool| verdicts.iter().filter(|v| f(v)).count() as f64 / n;
    let all: Vec<&Vec<u32>> = bag.iter().collect();
    let correct: Vec<&Vec<u32>> = bag.iter().zip(&verdicts).filter(|(_, v)| !v.gamma).map(|(p, _)| p).collect();
    NaiveReport {
        e_f: mean(&|i| ((lim.k_req as f64 - bag[i].len() as f64) / lim.k_req as f64).powi(2)),
        gamma_f: share(&|v| v.gamma_f),
        e_min: mean(&|i| verdicts[i].frac_under.powi(2)),
        e_max: mean(&|i| verdicts[i].frac_over.powi(2)),
        gamma_min: share(&|v| v.gamma_min),
        gamma_max: share(&|v| v.gamma_max),
        gamma: share(&|v| v.gamma),
        e_p: naive_pdf_error(&all, lim.k_grid),
        e_p_star: naive_pdf_error(&correct, lim.k_grid),
        eta: all.iter().collect::<BTreeSet<_>>().len() as u64,
        eta_star: correct.iter().collect::<BTreeSet<_>>().len() as u64,
    }
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// A configuration that admits correct patterns, built from integer grid
/// quantities on a 1 µs grid: `k_grid` points, `k_req` samples, spacing
/// limits around the average period.
#[derive(Debug, Clone)]
pub struct FeasibleCase {
    pub config: SamplingConfig,
    pub k_grid: u32,
    pub k_req: u32,
    pub k_min: Option<u32>,
    pub k_max: Option<u32>,
}

pub const T_GRID: f64 = 1e-6;

pub fn random_feasible<R: Rng>(rng: &mut R, max_grid: u32) -> FeasibleCase {
    let k_grid = rng.random_range(2..=max_grid);
    let k_req = rng.random_range(1..=k_grid.min(200));
    let period = k_grid / k_req;
    let k_min = rng.random_bool(0.7).then(|| rng.random_range(1..=period));
    let k_max = rng.random_bool(0.5).then(|| rng.random_range(k_grid.div_ceil(k_req)..=k_grid));
    let tau = k_grid as f64 * T_GRID;
    let mut config = SamplingConfig::new(tau, T_GRID, k_req as f64 / tau);
    if let Some(k) = k_min {
        config = config.with_t_min(k as f64 * T_GRID);
    }
    if let Some(k) = k_max {
        config = config.with_t_max(k as f64 * T_GRID);
    }
    FeasibleCase { config, k_grid, k_req, k_min, k_max }
}
