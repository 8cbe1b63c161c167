//! Number formatting, content hashing and artifact files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::LabError;

/// Significant digits of every serialized number.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const UNITS: &str = "time us, frequency MHz (ordinary), angle rad, solid angle sr";

/// Formats like C's `%.12g`. Non-finite values become `inf`, `-inf`, `nan`
/// and negative zero prints as `0`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), sign, exp.abs())
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// A JSON number rounded to [`SIGNIFICANT_DIGITS`], or the string form of
/// a non-finite value.
pub fn json_num(x: f64) -> Value {
    let text = fmt_num(x);
    match text.parse::<f64>().ok().filter(|v| v.is_finite()).and_then(serde_json::Number::from_f64) {
        Some(n) => Value::Number(n),
        None => Value::String(text),
    }
}

pub fn json_nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| json_num(x)).collect())
}

/// Git object id of `bytes` stored as a blob, with SHA-256 as the digest.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", bytes.len()).as_bytes());
    hasher.update(bytes);
    hasher.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Provenance carried by every artifact of one run.
#[derive(Debug, Clone)]
pub struct Metadata {
    pub command: &'static str,
    pub seed: u64,
    /// Fully resolved configuration.
    pub config: Value,
    /// Extra `key: value` lines.
    pub notes: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &'static str, seed: u64, config: Value) -> Self {
        Metadata { command, seed, config, notes: Vec::new() }
    }

    pub fn note(mut self, key: &str, value: impl Into<String>) -> Self {
        self.notes.push((key.to_string(), value.into()));
        self
    }

    /// Compact JSON with sorted keys.
    pub fn config_text(&self) -> String {
        self.config.to_string()
    }

    pub fn config_hash(&self) -> String {
        content_hash(self.config_text().as_bytes())
    }

    fn lines(&self) -> Vec<(String, String)> {
        let mut lines = vec![
            ("generator".to_string(), format!("sagqg {} {}", env!("CARGO_PKG_VERSION"), self.command)),
            ("units".to_string(), UNITS.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("config".to_string(), self.config_text()),
            ("config_hash".to_string(), self.config_hash()),
        ];
        lines.extend(self.notes.iter().cloned());
        lines
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in self.lines() {
            m.insert(k, Value::String(v));
        }
        m.insert("seed".into(), Value::from(self.seed));
        m.insert("config".into(), self.config.clone());
        Value::Object(m)
    }
}

/// Writes `# key: value` metadata lines, the column header and the rows.
pub fn write_csv(
    dir: &Path,
    name: &str,
    meta: &Metadata,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<PathBuf, LabError> {
    let mut text = String::new();
    for (k, v) in meta.lines() {
        let _ = writeln!(text, "# {k}: {v}");
    }
    text.push_str(&columns.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    write_file(dir, name, text.as_bytes())
}

/// Writes `{"metadata": …, …body}` as pretty JSON.
pub fn write_json(dir: &Path, name: &str, meta: &Metadata, body: Map<String, Value>) -> Result<PathBuf, LabError> {
    let mut root = body;
    root.insert("metadata".into(), meta.to_json());
    let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("JSON values always serialize");
    text.push('\n');
    write_file(dir, name, text.as_bytes())
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, LabError> {
    fs::create_dir_all(dir).map_err(|source| LabError::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|source| LabError::Io { path: path.clone(), source })?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_like_printf_g() {
        assert_eq!(fmt_num(7.0), "7");
        assert_eq!(fmt_num(0.1), "0.1");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0 * 1e-7), "6.66666666667e-08");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_num(0.0001), "0.0001");
        assert_eq!(fmt_num(999999999999.9), "1e+12");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn json_numbers_are_rounded() {
        assert_eq!(json_num(0.1 + 0.2).to_string(), "0.3");
        assert_eq!(json_num(f64::INFINITY), Value::String("inf".into()));
    }

    #[test]
    fn hash_matches_git_blob_layout() {
        // printf 'hello\n' | git hash-object --object-format=sha256 --stdin
        assert_eq!(
            content_hash(b"hello\n"),
            "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4"
        );
    }
}
