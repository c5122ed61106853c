//! Monte Carlo stopping rule.
//!
//! Means are checkpointed every `window` patterns. A run has converged once
//! at least `min_patterns` were tested and no watched mean moved by more than
//! `rel_tol` of its current value over the last window. A mean that is
//! currently 0 must have been exactly 0 a window ago as well.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRule {
    pub min_patterns: u64,
    pub window: u64,
    pub rel_tol: f64,
}

impl ConvergenceRule {
    /// 10^5 patterns minimum, 2*10^4-pattern window, 1 % tolerance.
    pub const FULL: ConvergenceRule = ConvergenceRule { min_patterns: 100_000, window: 20_000, rel_tol: 0.01 };

    /// The full rule scaled down tenfold in pattern counts.
    pub const DESK: ConvergenceRule = ConvergenceRule { min_patterns: 10_000, window: 2_000, rel_tol: 0.01 };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    /// Patterns tested so far.
    pub n: u64,
    pub means: Vec<f64>,
}

/// Applies `rule` to the latest checkpoint of `history`.
pub fn check_convergence(history: &[Checkpoint], rule: &ConvergenceRule) -> bool {
    let Some(last) = history.last() else {
        return false;
    };
    if last.n < rule.min_patterns || last.n < rule.window {
        return false;
    }
    let target = last.n - rule.window;
    let Some(earlier) = history.iter().rev().find(|c| c.n == target) else {
        return false;
    };
    if earlier.means.len() != last.means.len() {
        return false;
    }
    last.means.iter().zip(&earlier.means).all(|(&now, &then)| {
        let drift = (now - then).abs();
        if now == 0.0 {
            drift == 0.0
        } else {
            drift <= rule.rel_tol * now.abs()
        }
    })
}

/// Keeps the checkpoint history of one run.
#[derive(Debug, Clone)]
pub struct ConvergenceMonitor {
    rule: ConvergenceRule,
    history: Vec<Checkpoint>,
}

impl ConvergenceMonitor {
    pub fn new(rule: ConvergenceRule) -> Self {
        ConvergenceMonitor { rule, history: Vec::new() }
    }

    pub fn rule(&self) -> &ConvergenceRule {
        &self.rule
    }

    /// Records the means after `n` patterns and reports whether the run has
    /// converged.
    pub fn record(&mut self, n: u64, means: &[f64]) -> bool {
        self.history.push(Checkpoint { n, means: means.to_vec() });
        check_convergence(&self.history, &self.rule)
    }

    pub fn history(&self) -> &[Checkpoint] {
        &self.history
    }
}
