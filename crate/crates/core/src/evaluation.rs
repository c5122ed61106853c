//! Bag statistics: frequency and interval errors, incorrect-pattern ratios,
//! grid-usage uniformity and pattern uniqueness.
//!
//! [`MetricAccumulator`] is a streaming, mergeable tally; [`BagReport`] is its
//! finalized form. Counters merge exactly. Floating sums depend on merge order,
//! so callers that shard a bag merge shards in a fixed order.

pub mod convergence;

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::DerivedParams;
use crate::pattern::{Pattern, PatternVerdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("pattern lives on a grid of {found} points, accumulator expects {expected}")]
    GridMismatch { expected: u32, found: u32 },
    #[error("cannot merge accumulators built for different parameters")]
    ParamsMismatch,
    #[error("no patterns accumulated")]
    Empty,
}

/// 128-bit fingerprint of an index sequence (truncated SHA-256 of the
/// little-endian indices).
pub fn fingerprint(indices: &[u32]) -> u128 {
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 256];
    for chunk in indices.chunks(64) {
        for (dst, idx) in buf.chunks_exact_mut(4).zip(chunk) {
            dst.copy_from_slice(&idx.to_le_bytes());
        }
        hasher.update(&buf[..chunk.len() * 4]);
    }
    let digest = hasher.finalize();
    let mut head = [0u8; 16];
    head.copy_from_slice(&digest[..16]);
    u128::from_le_bytes(head)
}

/// How distinct patterns are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UniqueTracking {
    /// Patterns are not recorded.
    Off,
    /// Distinct fingerprints are counted.
    Fingerprint,
    /// Fingerprints plus the full sequence, so that equal fingerprints of
    /// different sequences still count twice.
    Confirmed,
}

#[derive(Debug, Clone, Default)]
struct UniqueSet {
    seen: HashMap<u128, Vec<Box<[u32]>>>,
    count: u64,
    collisions: u64,
}

impl UniqueSet {
    fn insert(&mut self, fp: u128, indices: &[u32], confirm: bool) {
        match self.seen.entry(fp) {
            Entry::Vacant(e) => {
                e.insert(if confirm { vec![indices.into()] } else { Vec::new() });
                self.count += 1;
            }
            Entry::Occupied(mut e) => {
                let known = e.get_mut();
                if confirm && !known.is_empty() && !known.iter().any(|s| **s == *indices) {
                    known.push(indices.into());
                    self.count += 1;
                    self.collisions += 1;
                }
            }
        }
    }

    fn merge(&mut self, other: UniqueSet) {
        self.collisions += other.collisions;
        for (fp, seqs) in other.seen {
            match self.seen.entry(fp) {
                Entry::Vacant(e) => {
                    self.count += seqs.len().max(1) as u64;
                    e.insert(seqs);
                }
                Entry::Occupied(mut e) => {
                    let known = e.get_mut();
                    if known.is_empty() {
                        continue;
                    }
                    for s in seqs {
                        if !known.contains(&s) {
                            known.push(s);
                            self.count += 1;
                            self.collisions += 1;
                        }
                    }
                }
            }
        }
    }
}

/// Streaming tally of bag statistics.
#[derive(Debug, Clone)]
pub struct MetricAccumulator {
    k_grid: u32,
    k_req: u32,
    n_seen: u64,
    sum_ef: f64,
    sum_emin: f64,
    sum_emax: f64,
    n_gamma_f: u64,
    n_gamma_min: u64,
    n_gamma_max: u64,
    n_gamma: u64,
    grid_hits: Vec<u64>,
    total_points: u64,
    grid_hits_star: Vec<u64>,
    total_points_star: u64,
    uniq: UniqueSet,
    uniq_star: UniqueSet,
    tracking: UniqueTracking,
}

impl MetricAccumulator {
    /// Empty accumulator for patterns on the grid of `d`, counting distinct
    /// patterns with full-sequence confirmation.
    pub fn new(d: &DerivedParams) -> Self {
        MetricAccumulator {
            k_grid: d.k_grid,
            k_req: d.k_req,
            n_seen: 0,
            sum_ef: 0.0,
            sum_emin: 0.0,
            sum_emax: 0.0,
            n_gamma_f: 0,
            n_gamma_min: 0,
            n_gamma_max: 0,
            n_gamma: 0,
            grid_hits: vec![0; d.k_grid as usize],
            total_points: 0,
            grid_hits_star: vec![0; d.k_grid as usize],
            total_points_star: 0,
            uniq: UniqueSet::default(),
            uniq_star: UniqueSet::default(),
            tracking: UniqueTracking::Confirmed,
        }
    }

    pub fn with_tracking(mut self, tracking: UniqueTracking) -> Self {
        self.tracking = tracking;
        self
    }

    /// Changes how subsequent patterns are recorded for uniqueness; already
    /// recorded patterns stay.
    pub fn set_tracking(&mut self, tracking: UniqueTracking) {
        self.tracking = tracking;
    }

    pub fn n_seen(&self) -> u64 {
        self.n_seen
    }

    pub fn k_grid(&self) -> u32 {
        self.k_grid
    }

    /// Fingerprint collisions resolved by sequence comparison so far.
    pub fn collisions(&self) -> u64 {
        self.uniq.collisions
    }

    pub fn accumulate(&mut self, p: &Pattern, v: &PatternVerdict) -> Result<(), EvalError> {
        if p.k_grid() != self.k_grid {
            return Err(EvalError::GridMismatch { expected: self.k_grid, found: p.k_grid() });
        }
        self.n_seen += 1;
        let rel = (self.k_req as f64 - p.len() as f64) / self.k_req as f64;
        self.sum_ef += rel * rel;
        self.sum_emin += v.frac_under * v.frac_under;
        self.sum_emax += v.frac_over * v.frac_over;
        self.n_gamma_f += v.gamma_f as u64;
        self.n_gamma_min += v.gamma_min as u64;
        self.n_gamma_max += v.gamma_max as u64;
        self.n_gamma += v.gamma as u64;

        for &idx in p.indices() {
            self.grid_hits[idx as usize - 1] += 1;
        }
        self.total_points += p.len() as u64;
        if !v.gamma {
            for &idx in p.indices() {
                self.grid_hits_star[idx as usize - 1] += 1;
            }
            self.total_points_star += p.len() as u64;
        }

        if self.tracking != UniqueTracking::Off {
            let confirm = self.tracking == UniqueTracking::Confirmed;
            let fp = fingerprint(p.indices());
            self.uniq.insert(fp, p.indices(), confirm);
            if !v.gamma {
                self.uniq_star.insert(fp, p.indices(), confirm);
            }
        }
        Ok(())
    }

    /// Folds `other` into `self`, as if its patterns had been accumulated
    /// after the ones already here.
    pub fn merge(&mut self, other: MetricAccumulator) -> Result<(), EvalError> {
        if other.k_grid != self.k_grid || other.k_req != self.k_req {
            return Err(EvalError::ParamsMismatch);
        }
        self.n_seen += other.n_seen;
        self.sum_ef += other.sum_ef;
        self.sum_emin += other.sum_emin;
        self.sum_emax += other.sum_emax;
        self.n_gamma_f += other.n_gamma_f;
        self.n_gamma_min += other.n_gamma_min;
        self.n_gamma_max += other.n_gamma_max;
        self.n_gamma += other.n_gamma;
        for (a, b) in self.grid_hits.iter_mut().zip(&other.grid_hits) {
            *a += b;
        }
        self.total_points += other.total_points;
        for (a, b) in self.grid_hits_star.iter_mut().zip(&other.grid_hits_star) {
            *a += b;
        }
        self.total_points_star += other.total_points_star;
        self.uniq.merge(other.uniq);
        self.uniq_star.merge(other.uniq_star);
        Ok(())
    }

    /// Scaled grid-point occurrence `p_g(m)` for `m = 1..=k_grid`, over all
    /// patterns or only correct ones. `None` when no points were seen.
    pub fn occurrence(&self, correct_only: bool) -> Option<Vec<f64>> {
        let (hits, total) = self.hits(correct_only);
        if total == 0 {
            return None;
        }
        let scale = self.k_grid as f64 / total as f64;
        Some(hits.iter().map(|&h| h as f64 * scale).collect())
    }

    fn hits(&self, correct_only: bool) -> (&[u64], u64) {
        if correct_only {
            (&self.grid_hits_star, self.total_points_star)
        } else {
            (&self.grid_hits, self.total_points)
        }
    }

    fn pdf_error(&self, correct_only: bool) -> Option<f64> {
        let (hits, total) = self.hits(correct_only);
        if total == 0 {
            return None;
        }
        let scale = self.k_grid as f64 / total as f64;
        let sum: f64 = hits
            .iter()
            .map(|&h| {
                let dev = h as f64 * scale - 1.0;
                dev * dev
            })
            .sum();
        Some(sum / self.k_grid as f64)
    }

    /// Current means of the metrics watched for convergence:
    /// `[e_f, e_min, e_max, gamma, e_p]` (`e_p` reads 0 while undefined).
    pub fn monitored_means(&self) -> [f64; 5] {
        let n = self.n_seen.max(1) as f64;
        [
            self.sum_ef / n,
            self.sum_emin / n,
            self.sum_emax / n,
            self.n_gamma as f64 / n,
            self.pdf_error(false).unwrap_or(0.0),
        ]
    }

    pub fn finalize(&self) -> Result<BagReport, EvalError> {
        if self.n_seen == 0 {
            return Err(EvalError::Empty);
        }
        let n = self.n_seen as f64;
        Ok(BagReport {
            e_f: self.sum_ef / n,
            gamma_f: self.n_gamma_f as f64 / n,
            e_min: self.sum_emin / n,
            e_max: self.sum_emax / n,
            gamma_min: self.n_gamma_min as f64 / n,
            gamma_max: self.n_gamma_max as f64 / n,
            gamma: self.n_gamma as f64 / n,
            e_p: self.pdf_error(false),
            e_p_star: self.pdf_error(true),
            eta: self.uniq.count,
            eta_star: self.uniq_star.count,
            n: self.n_seen,
        })
    }

    #[cfg(test)]
    fn insert_with_fingerprint(&mut self, fp: u128, indices: &[u32]) {
        self.uniq.insert(fp, indices, true);
    }
}

/// Finalized bag statistics.
///
/// `e_p` and `e_p_star` are `None` (JSON `null`) when the respective bag has
/// no sampling points at all; for `e_p_star` that includes a bag without
/// correct patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BagReport {
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
    pub n: u64,
}
