use thiserror::Error;

use crate::evaluation::EvalError;
use crate::pattern::text::FormatError;
use crate::romtools::RomError;

/// Problems with a sampling configuration, either as given or once quantized
/// onto the grid.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{field} must be positive and finite, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("sigma2 must be finite and non-negative, got {0}")]
    BadVariance(f64),
    #[error("t_min ({t_min} s) exceeds t_max ({t_max} s)")]
    MinAboveMax { t_min: f64, t_max: f64 },
    #[error("t_min ({t_min} s) exceeds the requested sampling period ({period} s)")]
    MinAbovePeriod { t_min: f64, period: f64 },
    #[error("t_max ({t_max} s) is below the requested sampling period ({period} s)")]
    MaxBelowPeriod { t_max: f64, period: f64 },
    #[error("pattern duration holds no grid point (tau / t_grid = {0})")]
    EmptyGrid(f64),
    #[error("grid of {0} points does not fit 32-bit indices")]
    GridTooLarge(f64),
    #[error("requested number of sampling points rounds to {0}, need at least 1")]
    NoSamplingPoints(u64),
    #[error("minimum spacing K_min = {k_min} exceeds maximum spacing K_max = {k_max}")]
    SpacingBoundsCrossed { k_min: u32, k_max: u32 },
    #[error("{k_req} points spaced at least {k_min} apart do not fit {k_grid} grid points")]
    NoRoom { k_grid: u32, k_min: u32, k_req: u32 },
    #[error("cannot parse quantity {input:?}: {reason}")]
    BadQuantity { input: String, reason: String },
}

impl ConfigError {
    /// Short machine-readable name of the violated constraint.
    pub fn constraint(&self) -> &'static str {
        match self {
            ConfigError::NotPositive { .. } => "positive_parameters",
            ConfigError::BadVariance(_) => "variance",
            ConfigError::MinAboveMax { .. } => "t_min_le_t_max",
            ConfigError::MinAbovePeriod { .. } => "t_min_le_period",
            ConfigError::MaxBelowPeriod { .. } => "t_max_ge_period",
            ConfigError::EmptyGrid(_) => "k_grid_ge_1",
            ConfigError::GridTooLarge(_) => "k_grid_fits_u32",
            ConfigError::NoSamplingPoints(_) => "k_req_ge_1",
            ConfigError::SpacingBoundsCrossed { .. } => "k_min_le_k_max",
            ConfigError::NoRoom { .. } => "room_for_k_req_points",
            ConfigError::BadQuantity { .. } => "quantity_syntax",
        }
    }
}

/// Violations of the pattern invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("grid index 0 at position {pos}; indices are 1-based")]
    ZeroIndex { pos: usize },
    #[error("grid index {index} at position {pos} exceeds grid size {k_grid}")]
    OutOfRange { pos: usize, index: u32, k_grid: u32 },
    #[error("indices not strictly increasing at position {pos}: {prev} then {next}")]
    NotIncreasing { pos: usize, prev: u32, next: u32 },
    #[error("grid size must be at least 1")]
    EmptyGrid,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Rom(#[from] RomError),
    #[error(transparent)]
    Spec(#[from] crate::experiments::SpecError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
