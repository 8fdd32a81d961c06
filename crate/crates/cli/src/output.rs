//! Locale-independent number formatting and output sinks.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::Value;

/// Significant digits kept in every emitted number.
pub const SIG_DIGITS: usize = 12;

/// `x` with 12 significant digits, positional unless the exponent is extreme.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-6..=15).contains(&exp) {
        let rounded: f64 = sci.parse().expect("valid float");
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{rounded:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        num(x).parse().expect("formatted number parses")
    } else {
        x
    }
}

/// JSON number rounded like [`num`]; non-finite values become `null`.
pub fn jnum(x: f64) -> Value {
    serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
}

pub fn jnums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| jnum(x)).collect())
}

/// Writes `text` (newline-terminated) to `out`, or stdout when absent.
pub fn emit(text: &str, out: Option<&Path>) -> io::Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

pub fn json_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialise")
}
