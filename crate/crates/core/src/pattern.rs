//! Sampling patterns on a uniform grid.

pub mod text;

use serde::Serialize;

use crate::config::DerivedParams;
use crate::error::PatternError;

/// A sampling pattern stored as strictly increasing 1-based grid indices.
///
/// The `k`-th sampling instant is `indices[k] * t_grid`. The invariant is
/// checked on construction and cannot be broken afterwards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pattern {
    indices: Vec<u32>,
    k_grid: u32,
    t_grid: f64,
}

impl Pattern {
    pub fn new(indices: Vec<u32>, k_grid: u32, t_grid: f64) -> Result<Self, PatternError> {
        check_indices(&indices, k_grid)?;
        Ok(Pattern { indices, k_grid, t_grid })
    }

    /// Caller guarantees the invariant; checked in debug builds.
    pub(crate) fn from_raw(indices: Vec<u32>, k_grid: u32, t_grid: f64) -> Self {
        debug_assert!(check_indices(&indices, k_grid).is_ok(), "{indices:?}");
        Pattern { indices, k_grid, t_grid }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn into_indices(self) -> Vec<u32> {
        self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn k_grid(&self) -> u32 {
        self.k_grid
    }

    pub fn t_grid(&self) -> f64 {
        self.t_grid
    }

    /// Sampling instants in seconds.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.indices.iter().map(move |&i| i as f64 * self.t_grid)
    }

    /// Differences between adjacent indices, in grid periods.
    pub fn intervals(&self) -> impl Iterator<Item = u32> + '_ {
        self.indices.windows(2).map(|w| w[1] - w[0])
    }
}

fn check_indices(indices: &[u32], k_grid: u32) -> Result<(), PatternError> {
    if k_grid == 0 {
        return Err(PatternError::EmptyGrid);
    }
    let mut prev = 0u32;
    for (pos, &index) in indices.iter().enumerate() {
        if index == 0 {
            return Err(PatternError::ZeroIndex { pos });
        }
        if index > k_grid {
            return Err(PatternError::OutOfRange { pos, index, k_grid });
        }
        if pos > 0 && index <= prev {
            return Err(PatternError::NotIncreasing { pos, prev, next: index });
        }
        prev = index;
    }
    Ok(())
}

/// Per-pattern requirement check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternVerdict {
    /// Point count differs from the requested count.
    pub gamma_f: bool,
    /// Some interval is shorter than `k_min`.
    pub gamma_min: bool,
    /// Some interval is longer than `k_max`.
    pub gamma_max: bool,
    /// Any of the above.
    pub gamma: bool,
    /// Share of intervals below `k_min`.
    pub frac_under: f64,
    /// Share of intervals above `k_max`.
    pub frac_over: f64,
}

impl PatternVerdict {
    pub fn is_correct(&self) -> bool {
        !self.gamma
    }
}

/// Checks a pattern against the point count and interval limits of `d`.
///
/// Patterns with fewer than two points have no intervals; both interval
/// fractions are then 0.
pub fn validate_pattern(p: &Pattern, d: &DerivedParams) -> PatternVerdict {
    let gamma_f = p.len() != d.k_req as usize;
    let n_intervals = p.len().saturating_sub(1);
    let (mut under, mut over) = (0usize, 0usize);
    for diff in p.intervals() {
        if diff < d.k_min {
            under += 1;
        }
        if !d.within_max(diff) {
            over += 1;
        }
    }
    let (frac_under, frac_over) = if n_intervals == 0 {
        (0.0, 0.0)
    } else {
        (under as f64 / n_intervals as f64, over as f64 / n_intervals as f64)
    };
    let gamma_min = under > 0;
    let gamma_max = over > 0;
    PatternVerdict { gamma_f, gamma_min, gamma_max, gamma: gamma_f || gamma_min || gamma_max, frac_under, frac_over }
}

/// Samples `signal` (a function of time in seconds) at the pattern's instants.
pub fn apply_pattern<F: Fn(f64) -> f64>(p: &Pattern, signal: F) -> Vec<f64> {
    p.times().map(signal).collect()
}
