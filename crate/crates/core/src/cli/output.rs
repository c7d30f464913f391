use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::config::Format;
use crate::error::{Error, Result};

/// Significant digits of every emitted real.
pub const SIG_DIGITS: usize = 12;

/// A finished command: its document in both encodings and whether every
/// check passed.
#[derive(Clone, Debug)]
pub struct Report {
    pub json: Value,
    pub csv: String,
    pub passed: bool,
    pub default_format: Format,
}

impl Report {
    pub fn new(doc: &impl Serialize, csv: String, passed: bool, default_format: Format) -> Result<Self> {
        let json = serde_json::to_value(doc).map_err(|e| Error::Consistency(e.to_string()))?;
        Ok(Report {
            json: round_json(json),
            csv,
            passed,
            default_format,
        })
    }

    pub fn render(&self, format: Option<Format>) -> String {
        match format.unwrap_or(self.default_format) {
            Format::Json => render_json(&self.json),
            Format::Csv => self.csv.clone(),
        }
    }
}

pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Round `x` to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Fixed-point text with [`SIG_DIGITS`] significant digits.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let x = round_sig(x);
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (SIG_DIGITS as i32 - 1 - magnitude).max(0) as usize;
    if magnitude < -6 || magnitude >= SIG_DIGITS as i32 {
        return format!("{:.*e}", SIG_DIGITS - 1, x);
    }
    format!("{x:.decimals$}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("checked f64");
            serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Write to `path`, or to stdout when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
