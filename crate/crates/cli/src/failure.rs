//! Exit codes and the JSON error record printed on stderr.

use patternforge::evaluation::EvalError;
use patternforge::pattern::text::FormatError;
use patternforge::romtools::RomError;
use patternforge::{ConfigError, PatternError};
use serde::Serialize;
use thiserror::Error;

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_MALFORMED: i32 = 4;
pub const EXIT_IO: i32 = 5;
pub const EXIT_REPLAY_MISMATCH: i32 = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Malformed(String),
    #[error("{0}")]
    ReplayMismatch(String),
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint: Option<&'static str>,
}

fn config(e: &ConfigError) -> (&'static str, i32, Option<&'static str>) {
    ("config", EXIT_CONFIG, Some(e.constraint()))
}

pub fn classify(err: &anyhow::Error) -> ErrorRecord {
    let (error, code, constraint) = err
        .chain()
        .find_map(|cause| {
            if let Some(e) = cause.downcast_ref::<CliError>() {
                return Some(match e {
                    CliError::Usage(_) => ("usage", EXIT_USAGE, None),
                    CliError::Malformed(_) => ("malformed_input", EXIT_MALFORMED, None),
                    CliError::ReplayMismatch(_) => ("replay_mismatch", EXIT_REPLAY_MISMATCH, None),
                });
            }
            if let Some(e) = cause.downcast_ref::<patternforge::Error>() {
                return Some(match e {
                    patternforge::Error::Config(c) => config(c),
                    patternforge::Error::Spec(_) | patternforge::Error::Eval(_) => ("config", EXIT_CONFIG, None),
                    patternforge::Error::Io(_) => ("io", EXIT_IO, None),
                    _ => ("malformed_input", EXIT_MALFORMED, None),
                });
            }
            if let Some(c) = cause.downcast_ref::<ConfigError>() {
                return Some(config(c));
            }
            if cause.is::<EvalError>() {
                return Some(("config", EXIT_CONFIG, None));
            }
            if let Some(FormatError::Io(_)) = cause.downcast_ref::<FormatError>() {
                return Some(("io", EXIT_IO, None));
            }
            if cause.is::<FormatError>() || cause.is::<RomError>() || cause.is::<PatternError>() || cause.is::<serde_json::Error>() {
                return Some(("malformed_input", EXIT_MALFORMED, None));
            }
            if cause.is::<std::io::Error>() {
                return Some(("io", EXIT_IO, None));
            }
            None
        })
        .unwrap_or(("internal", EXIT_OTHER, None));
    ErrorRecord { error, code, message: format!("{err:#}"), constraint }
}
