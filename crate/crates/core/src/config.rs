//! The pattern generation problem and its grid-quantized form.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Relative slack used when snapping quotients of decimal inputs to integers.
///
/// `0.005 ms / 25e-5 us` is 20000 on paper but 19999.999999999996 in binary
/// floating point; without snapping the floor would lose a grid point.
const SNAP_TOLERANCE: f64 = 1e-9;

/// Generation problem: pattern duration, grid period, requested average
/// sampling frequency, optional interval limits and the generator variance.
///
/// All times are in seconds, frequencies in hertz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub tau: f64,
    pub t_grid: f64,
    pub f_req: f64,
    #[serde(default)]
    pub t_min: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub sigma2: f64,
}

impl SamplingConfig {
    pub fn new(tau: f64, t_grid: f64, f_req: f64) -> Self {
        SamplingConfig { tau, t_grid, f_req, t_min: None, t_max: None, sigma2: 0.0 }
    }

    pub fn with_t_min(mut self, t_min: f64) -> Self {
        self.t_min = Some(t_min);
        self
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = Some(t_max);
        self
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Self {
        self.sigma2 = sigma2;
        self
    }

    /// Checks the invariants of the problem statement, including that the
    /// requested period lies between `t_min` and `t_max`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, value) in [("tau", self.tau), ("t_grid", self.t_grid), ("f_req", self.f_req)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::NotPositive { field, value });
            }
        }
        if !(self.sigma2.is_finite() && self.sigma2 >= 0.0) {
            return Err(ConfigError::BadVariance(self.sigma2));
        }
        if let Some(t_min) = self.t_min {
            if !(t_min.is_finite() && t_min >= 0.0) {
                return Err(ConfigError::NotPositive { field: "t_min", value: t_min });
            }
        }
        if let Some(t_max) = self.t_max {
            if !(t_max.is_finite() && t_max > 0.0) {
                return Err(ConfigError::NotPositive { field: "t_max", value: t_max });
            }
        }
        if let (Some(t_min), Some(t_max)) = (self.t_min, self.t_max) {
            if t_min > t_max {
                return Err(ConfigError::MinAboveMax { t_min, t_max });
            }
        }
        let period = 1.0 / self.f_req;
        if let Some(t_min) = self.t_min {
            if exceeds(t_min, period) {
                return Err(ConfigError::MinAbovePeriod { t_min, period });
            }
        }
        if let Some(t_max) = self.t_max {
            if exceeds(period, t_max) {
                return Err(ConfigError::MaxBelowPeriod { t_max, period });
            }
        }
        Ok(())
    }
}

fn exceeds(a: f64, b: f64) -> bool {
    a > b * (1.0 + SNAP_TOLERANCE)
}

/// Integer quantities of a [`SamplingConfig`] realized on its grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Number of grid points in a pattern.
    pub k_grid: u32,
    pub t_grid: f64,
    /// Realizable pattern duration, `k_grid * t_grid`.
    pub tau_hat: f64,
    /// Realizable requested number of sampling points.
    pub k_req: u32,
    /// Realizable requested average sampling frequency.
    pub f_hat: f64,
    /// Realizable requested average sampling period.
    pub t_hat: f64,
    /// Requested average sampling period in grid periods.
    pub n_avg: u32,
    /// Minimum spacing between adjacent points, in grid periods.
    pub k_min: u32,
    /// Maximum spacing in grid periods; `None` means unbounded.
    pub k_max: Option<u32>,
}

impl DerivedParams {
    /// Quantizes `cfg` onto its grid. Only structural problems are errors
    /// here; whether correct patterns can exist at all is checked by
    /// [`DerivedParams::check_feasible`].
    pub fn realize(cfg: &SamplingConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let grid_ratio = cfg.tau / cfg.t_grid;
        let k_grid = snap_floor(grid_ratio);
        if k_grid < 1.0 {
            return Err(ConfigError::EmptyGrid(grid_ratio));
        }
        if k_grid > u32::MAX as f64 {
            return Err(ConfigError::GridTooLarge(k_grid));
        }
        let k_grid = k_grid as u32;
        let tau_hat = k_grid as f64 * cfg.t_grid;
        let k_req = snap_round(tau_hat * cfg.f_req);
        if k_req < 1.0 {
            return Err(ConfigError::NoSamplingPoints(0));
        }
        if k_req > u32::MAX as f64 {
            return Err(ConfigError::GridTooLarge(k_req));
        }
        let k_req = k_req as u32;
        let f_hat = k_req as f64 / tau_hat;
        let t_hat = 1.0 / f_hat;
        // t_hat / t_grid == k_grid / k_req exactly; the integer form avoids
        // compounding rounding error.
        let n_avg = round_ratio(k_grid as u64, k_req as u64) as u32;
        let k_min = cfg.t_min.map_or(1, |t| (snap_ceil(t / cfg.t_grid) as u32).max(1));
        let k_max = cfg.t_max.map(|t| snap_floor(t / cfg.t_grid).min(u32::MAX as f64) as u32);
        Ok(DerivedParams { k_grid, t_grid: cfg.t_grid, tau_hat, k_req, f_hat, t_hat, n_avg, k_min, k_max })
    }

    /// Checks that a correct pattern exists: `k_min <= k_max` and there is room
    /// for `k_req` points spaced `k_min` apart.
    pub fn check_feasible(&self) -> Result<(), ConfigError> {
        if self.k_req < 1 {
            return Err(ConfigError::NoSamplingPoints(self.k_req as u64));
        }
        if let Some(k_max) = self.k_max {
            if self.k_min > k_max {
                return Err(ConfigError::SpacingBoundsCrossed { k_min: self.k_min, k_max });
            }
        }
        if self.first_point_upper_limit() < 1 {
            return Err(ConfigError::NoRoom { k_grid: self.k_grid, k_min: self.k_min, k_req: self.k_req });
        }
        Ok(())
    }

    /// `k_grid - k_min * (k_req - 1)`: the last grid index the first point may
    /// take while leaving room for the rest.
    pub fn first_point_upper_limit(&self) -> i64 {
        self.k_grid as i64 - self.k_min as i64 * (self.k_req as i64 - 1)
    }

    /// Whether an index difference respects the maximum spacing.
    pub fn within_max(&self, diff: u32) -> bool {
        self.k_max.is_none_or(|k_max| diff <= k_max)
    }
}

/// Derives the grid quantities and rejects configurations for which no
/// correct pattern exists.
pub fn derive_params(cfg: &SamplingConfig) -> Result<DerivedParams, ConfigError> {
    let d = DerivedParams::realize(cfg)?;
    d.check_feasible()?;
    Ok(d)
}

/// Nearest integer with ties away from zero, for non-negative `num / den`.
pub(crate) fn round_ratio(num: u64, den: u64) -> u64 {
    (2 * num + den) / (2 * den)
}

fn snap(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= SNAP_TOLERANCE * x.abs().max(1.0)).then_some(r)
}

fn snap_floor(x: f64) -> f64 {
    snap(x).unwrap_or_else(|| x.floor())
}

fn snap_ceil(x: f64) -> f64 {
    snap(x).unwrap_or_else(|| x.ceil())
}

/// Round half away from zero, treating values within tolerance of a half as
/// exact ties.
fn snap_round(x: f64) -> f64 {
    let half = x.trunc() + 0.5f64.copysign(x);
    if (x - half).abs() <= SNAP_TOLERANCE * x.abs().max(1.0) {
        half + 0.5f64.copysign(x)
    } else {
        x.round()
    }
}
