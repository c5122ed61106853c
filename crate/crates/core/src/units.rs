//! Unit-suffixed quantities such as `"1ms"`, `"25e-5us"` or `"100kHz"`.
//!
//! Everything is normalized to seconds or hertz on ingestion. A bare number is
//! taken to already be in the canonical unit.

use crate::error::ConfigError;

const TIME_UNITS: &[(&str, f64)] = &[
    ("ps", 1e-12),
    ("ns", 1e-9),
    ("us", 1e-6),
    ("µs", 1e-6),
    ("μs", 1e-6),
    ("ms", 1e-3),
    ("s", 1.0),
];

// Matched case-insensitively, so "mhz" means megahertz.
const FREQ_UNITS: &[(&str, f64)] = &[("ghz", 1e9), ("mhz", 1e6), ("khz", 1e3), ("hz", 1.0)];

/// Parses a duration and returns seconds.
pub fn parse_time(input: &str) -> Result<f64, ConfigError> {
    let s = input.trim();
    for (suffix, scale) in TIME_UNITS {
        if let Some(number) = s.strip_suffix(suffix) {
            return parse_number(input, number).map(|v| scale_exact(v, *scale));
        }
    }
    parse_number(input, s)
}

/// Parses a frequency and returns hertz.
pub fn parse_frequency(input: &str) -> Result<f64, ConfigError> {
    let s = input.trim();
    let lower = s.to_ascii_lowercase();
    for (suffix, scale) in FREQ_UNITS {
        if lower.ends_with(suffix) {
            let number = &s[..s.len() - suffix.len()];
            return parse_number(input, number).map(|v| scale_exact(v, *scale));
        }
    }
    parse_number(input, s)
}

fn parse_number(input: &str, number: &str) -> Result<f64, ConfigError> {
    let number = number.trim();
    if number.is_empty() {
        return Err(ConfigError::BadQuantity { input: input.to_string(), reason: "missing number".into() });
    }
    let v: f64 = number.parse().map_err(|e: std::num::ParseFloatError| ConfigError::BadQuantity {
        input: input.to_string(),
        reason: e.to_string(),
    })?;
    if !v.is_finite() {
        return Err(ConfigError::BadQuantity { input: input.to_string(), reason: "not finite".into() });
    }
    Ok(v)
}

// Division by the reciprocal keeps decimal inputs like 1e-6 * 1e3 closer to
// the literal they denote than the plain product does.
fn scale_exact(value: f64, scale: f64) -> f64 {
    if scale < 1.0 {
        value / (1.0 / scale).round()
    } else {
        value * scale
    }
}
