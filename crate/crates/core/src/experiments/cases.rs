//! Reference configurations.

use serde::Serialize;

use crate::config::{DerivedParams, SamplingConfig};
use crate::error::ConfigError;

const MS: f64 = 1e-3;
const US: f64 = 1e-6;
const KHZ: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedCase {
    pub name: &'static str,
    pub config: SamplingConfig,
}

/// 1 ms patterns on a 1 µs grid at 100 kHz, at least 5 µs between points.
pub fn experiment1_config() -> SamplingConfig {
    SamplingConfig::new(1.0 * MS, 1.0 * US, 100.0 * KHZ).with_t_min(5.0 * US)
}

/// The four cases of the second experiment.
pub fn builtin_cases() -> Vec<NamedCase> {
    vec![
        NamedCase {
            name: "A",
            config: SamplingConfig::new(1e3 * MS, 1e3 * US, 0.05 * KHZ).with_t_min(10.0 * MS).with_t_max(30.0 * MS),
        },
        NamedCase {
            name: "B",
            config: SamplingConfig::new(0.1 * MS, 1.0 * US, 50.0 * KHZ).with_t_min(0.015 * MS).with_t_max(0.028 * MS),
        },
        NamedCase { name: "C", config: SamplingConfig::new(1e3 * MS, 1.0 * US, 10.0 * KHZ) },
        NamedCase { name: "D", config: SamplingConfig::new(0.005 * MS, 25e-5 * US, 1e5 * KHZ).with_t_max(14e-6 * MS) },
    ]
}

pub fn builtin_case(name: &str) -> Option<NamedCase> {
    builtin_cases().into_iter().find(|c| c.name.eq_ignore_ascii_case(name))
}

/// One line of the case table: inputs and the grid quantities they produce.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRow {
    pub case: String,
    pub tau_ms: f64,
    pub t_grid_us: f64,
    pub f_req_khz: f64,
    pub t_min_ms: Option<f64>,
    pub t_max_ms: Option<f64>,
    pub k_grid: u32,
    pub k_req: u32,
    pub k_min: Option<u32>,
    pub k_max: Option<u32>,
    pub n_avg: u32,
}

/// `value / unit`, rounded to 12 significant digits to hide binary
/// representation noise.
fn in_unit(value: f64, unit: f64) -> f64 {
    format!("{:.11e}", value / unit).parse().unwrap()
}

impl CaseRow {
    pub fn new(name: &str, cfg: &SamplingConfig) -> Result<Self, ConfigError> {
        let d = DerivedParams::realize(cfg)?;
        d.check_feasible()?;
        Ok(CaseRow {
            case: name.to_string(),
            tau_ms: in_unit(cfg.tau, MS),
            t_grid_us: in_unit(cfg.t_grid, US),
            f_req_khz: in_unit(cfg.f_req, KHZ),
            t_min_ms: cfg.t_min.map(|t| in_unit(t, MS)),
            t_max_ms: cfg.t_max.map(|t| in_unit(t, MS)),
            k_grid: d.k_grid,
            k_req: d.k_req,
            // An absent lower limit is reported as absent, not as its default of 1.
            k_min: cfg.t_min.map(|_| d.k_min),
            k_max: d.k_max,
            n_avg: d.n_avg,
        })
    }
}

pub fn case_table() -> Vec<CaseRow> {
    builtin_cases().iter().map(|c| CaseRow::new(c.name, &c.config).expect("built-in cases are feasible")).collect()
}
