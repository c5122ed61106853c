//! Constrained random sampling patterns for event-driven ADCs.
//!
//! The crate covers the full offline workflow:
//!
//! - [`config`]: the generation problem (pattern length, grid period, requested
//!   frequency, interval limits) and the integer quantities derived from it.
//! - [`pattern`]: sampling patterns as strictly increasing 1-based grid indices,
//!   per-pattern validation and the plain-text interchange format.
//! - [`generators`]: Jittered Sampling, Additive Random Sampling and ANGIE, plus
//!   reproducible bag generation over independent random streams.
//! - [`evaluation`]: mergeable metric accumulators, bag reports and the Monte
//!   Carlo convergence rule.
//! - [`experiments`]: variance sweeps and the built-in reference cases.
//! - [`romtools`]: ROM footprint, the `.crsp` binary image and a trigger-timing
//!   model of the ADC driver.

pub mod config;
pub mod evaluation;
pub mod experiments;
pub mod generators;
pub mod pattern;
pub mod rng;
pub mod romtools;
pub mod units;

mod error;

pub use config::{derive_params, DerivedParams, SamplingConfig};
pub use error::{ConfigError, Error, PatternError};
pub use evaluation::{BagReport, MetricAccumulator};
pub use generators::{generate_angie, generate_ars, generate_bag, generate_js, GeneratorKind, PatternBag};
pub use pattern::{apply_pattern, validate_pattern, Pattern, PatternVerdict};
pub use rng::{Deviates, RandomSource};

pub type Result<T, E = Error> = std::result::Result<T, E>;
