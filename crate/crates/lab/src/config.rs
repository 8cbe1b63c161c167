//! Layered run configuration: flags, then the JSON config file, then
//! built-in defaults.

use std::path::Path;

use clap::CommandFactory;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use sagqg_core::benchmarking::{detuning_sigma_from_t2_star, NoiseModel};

use crate::cli::Cli;
use crate::error::LabError;

/// Environment variable consulted when no seed is given.
pub const SEED_ENV: &str = "SAGQG_SEED";

/// Overlays the flags that were given on top of the config file.
///
/// Config keys are the long flag names of the subcommand; anything else is
/// rejected, as is `config` itself.
pub fn layer<T: Serialize + DeserializeOwned>(subcommand: &str, flags: &T, file: Option<&Path>) -> Result<T, LabError> {
    let mut merged = match file {
        Some(path) => load_file(subcommand, path)?,
        None => Map::new(),
    };
    if let Value::Object(given) = serde_json::to_value(flags).expect("argument structs serialize") {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| LabError::usage(format!("config: {e}")))
}

fn load_file(subcommand: &str, path: &Path) -> Result<Map<String, Value>, LabError> {
    let text = std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.to_path_buf(), source })?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| LabError::usage(format!("{}: invalid JSON: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(LabError::usage(format!("{}: expected a JSON object", path.display())));
    };
    let known = long_flags(subcommand);
    if let Some(bad) = map.keys().find(|k| k.as_str() == "config" || !known.contains(k)) {
        return Err(LabError::usage(format!(
            "{}: unknown key `{bad}` for `{subcommand}` (expected one of: {})",
            path.display(),
            known.iter().filter(|k| k.as_str() != "config").cloned().collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(map)
}

fn long_flags(subcommand: &str) -> Vec<String> {
    let cmd = Cli::command();
    cmd.find_subcommand(subcommand)
        .map(|sub| sub.get_arguments().filter_map(|a| a.get_long()).map(str::to_string).collect())
        .unwrap_or_default()
}

/// Explicit seed, else `SAGQG_SEED`, else 0.
pub fn resolve_seed(explicit: Option<u64>) -> Result<u64, LabError> {
    if let Some(seed) = explicit {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| LabError::usage(format!("{SEED_ENV}={text:?} is not an unsigned 64-bit integer"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(LabError::usage(format!("{SEED_ENV}: {e}"))),
    }
}

/// Parses `none` or a comma list of `key:value` with keys `detuning`,
/// `t2star`, `amplitude`, `timing` and `clip`.
///
/// `t2star:4.25` sets the detuning spread from a dephasing time in µs.
pub fn parse_noise(text: &str) -> Result<NoiseModel, LabError> {
    let mut model = NoiseModel::none();
    let text = text.trim();
    if text.is_empty() || text == "none" {
        return Ok(model);
    }
    let mut detuning_set = false;
    for item in text.split(',') {
        let (key, value) = item
            .split_once(':')
            .ok_or_else(|| LabError::usage(format!("noise term `{item}` is not key:value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| LabError::usage(format!("noise term `{item}` has a non-numeric value")))?;
        match key.trim() {
            "detuning" | "t2star" if detuning_set => {
                return Err(LabError::usage("give at most one of detuning and t2star"));
            }
            "detuning" => {
                model.detuning_sigma = value;
                detuning_set = true;
            }
            "t2star" => {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(LabError::usage("t2star must be positive"));
                }
                model.detuning_sigma = detuning_sigma_from_t2_star(value);
                detuning_set = true;
            }
            "amplitude" => model.amplitude_error_sigma = value,
            "timing" => model.timing_error_sigma = value,
            "clip" => model.rabi_clip = Some(value),
            other => return Err(LabError::usage(format!("unknown noise channel `{other}`"))),
        }
    }
    model.validate()?;
    Ok(model)
}

pub fn noise_json(model: &NoiseModel) -> Value {
    json!({
        "detuning_sigma_MHz": model.detuning_sigma,
        "amplitude_error_sigma": model.amplitude_error_sigma,
        "timing_error_sigma": model.timing_error_sigma,
        "rabi_clip_MHz": model.rabi_clip,
    })
}

/// Parses `lo:hi:n` (n evenly spaced values, both ends included) or a
/// comma-separated list.
pub fn parse_values(text: &str) -> Result<Vec<f64>, LabError> {
    let bad = || LabError::usage(format!("`{text}` is neither lo:hi:n nor a comma list of numbers"));
    let values = if text.contains(':') {
        let (lo, hi, n) = parse_range(text)?;
        linspace(lo, hi, n)
    } else {
        text.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

/// Parses `lo:hi:n`.
pub fn parse_range(text: &str) -> Result<(f64, f64, usize), LabError> {
    let bad = || LabError::usage(format!("`{text}` is not a range lo:hi:n"));
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let [lo, hi, n] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(bad());
    }
    Ok((lo, hi, n))
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_terms() {
        let m = parse_noise("detuning:0.05, amplitude:0.01,clip:7").unwrap();
        assert_eq!(m.detuning_sigma, 0.05);
        assert_eq!(m.amplitude_error_sigma, 0.01);
        assert_eq!(m.rabi_clip, Some(7.0));
        assert!(parse_noise("none").unwrap().is_noiseless());
        let t2 = parse_noise("t2star:4.25").unwrap();
        assert_eq!(t2.detuning_sigma, detuning_sigma_from_t2_star(4.25));
        for bad in ["detuning", "detuning:x", "spin:1", "detuning:-1", "t2star:1,detuning:1", "clip:0"] {
            assert!(parse_noise(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn value_lists_and_ranges() {
        assert_eq!(parse_values("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_values("0.5, 2").unwrap(), vec![0.5, 2.0]);
        assert_eq!(parse_values("4:4:1").unwrap(), vec![4.0]);
        for bad in ["", "1:2", "2:1:3", "1:2:0", "a,b", "1:nan:2"] {
            assert!(parse_values(bad).is_err(), "{bad}");
        }
    }
}
