//! Resolving the sampling configuration from flags, files and built-in cases.

use std::path::Path;

use anyhow::Context;
use patternforge::experiments::{builtin_case, experiment1_config};
use patternforge::units::{parse_frequency, parse_time};
use patternforge::SamplingConfig;
use serde_json::{Map, Value};

use crate::args::ConfigArgs;
use crate::failure::CliError;

pub fn resolve(args: &ConfigArgs) -> anyhow::Result<SamplingConfig> {
    let mut cfg = match &args.case {
        Some(name) => builtin_case(name)
            .ok_or_else(|| CliError::Usage(format!("unknown case {name:?}; expected A, B, C or D")))?
            .config,
        None => experiment1_config(),
    };
    if let Some(path) = &args.config {
        apply_file(&mut cfg, path)?;
    }
    if let Some(v) = &args.tau {
        cfg.tau = parse_time(v)?;
    }
    if let Some(v) = &args.t_grid {
        cfg.t_grid = parse_time(v)?;
    }
    if let Some(v) = &args.f_req {
        cfg.f_req = parse_frequency(v)?;
    }
    if let Some(v) = &args.t_min {
        cfg.t_min = optional_time(v)?;
    }
    if let Some(v) = &args.t_max {
        cfg.t_max = optional_time(v)?;
    }
    if let Some(v) = args.sigma2 {
        cfg.sigma2 = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn optional_time(v: &str) -> anyhow::Result<Option<f64>> {
    if v.eq_ignore_ascii_case("none") || v.eq_ignore_ascii_case("inf") {
        Ok(None)
    } else {
        Ok(Some(parse_time(v)?))
    }
}

fn apply_file(cfg: &mut SamplingConfig, path: &Path) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(CliError::Malformed(format!("{}: expected a JSON object", path.display())).into());
    };
    apply_map(cfg, &map).map_err(|e| match e.downcast::<CliError>() {
        Ok(CliError::Malformed(msg)) => CliError::Malformed(format!("{}: {msg}", path.display())).into(),
        Ok(other) => other.into(),
        Err(e) => e,
    })
}

fn apply_map(cfg: &mut SamplingConfig, map: &Map<String, Value>) -> anyhow::Result<()> {
    for (key, value) in map {
        match key.as_str() {
            "tau" => cfg.tau = quantity(value, parse_time)?.ok_or_else(|| null_field(key))?,
            "t_grid" => cfg.t_grid = quantity(value, parse_time)?.ok_or_else(|| null_field(key))?,
            "f_req" => cfg.f_req = quantity(value, parse_frequency)?.ok_or_else(|| null_field(key))?,
            "t_min" => cfg.t_min = quantity(value, parse_time)?,
            "t_max" => cfg.t_max = quantity(value, parse_time)?,
            "sigma2" => {
                cfg.sigma2 = value.as_f64().ok_or_else(|| CliError::Malformed("sigma2 must be a number".into()))?
            }
            other => return Err(CliError::Malformed(format!("unknown field {other:?}")).into()),
        }
    }
    Ok(())
}

fn null_field(key: &str) -> CliError {
    CliError::Malformed(format!("{key} may not be null"))
}

/// A number in canonical units, a unit string, or null.
fn quantity(
    value: &Value,
    parse: fn(&str) -> Result<f64, patternforge::ConfigError>,
) -> anyhow::Result<Option<f64>> {
    match value {
        Value::Null => Ok(None),
        Value::Number(n) => Ok(n.as_f64()),
        Value::String(s) => Ok(Some(parse(s)?)),
        other => Err(CliError::Malformed(format!("expected a number or unit string, found {other}")).into()),
    }
}

/// The configuration as recorded in manifests.
pub fn echo(cfg: &SamplingConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}
