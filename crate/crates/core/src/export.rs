//! Plain-text writers for matrices and curves.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros
/// dropped, scientific notation outside `1e-4 <= |x| < 1e12`.
pub fn format_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..DIGITS).contains(&exp) {
        let fixed = format!("{:.*}", (DIGITS - 1 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn quote(name: &str) -> String {
    if name.contains([',', '"', '\n']) {
        format!("\"{}\"", name.replace('"', "\"\""))
    } else {
        name.to_string()
    }
}

/// CSV with a header row of column names and a leading column of row names.
pub fn matrix_csv(row_names: &[String], col_names: &[String], values: &Array2<f64>) -> Result<String> {
    if values.dim() != (row_names.len(), col_names.len()) {
        return Err(Error::Shape(format!(
            "{:?} values for {} x {} names",
            values.dim(),
            row_names.len(),
            col_names.len()
        )));
    }
    let mut out = String::new();
    for name in col_names {
        out.push(',');
        out.push_str(&quote(name));
    }
    out.push('\n');
    for (name, row) in row_names.iter().zip(values.outer_iter()) {
        out.push_str(&quote(name));
        for v in row {
            out.push(',');
            out.push_str(&format_g12(*v));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Two-column CSV of curve points.
pub fn curve_csv(header: (&str, &str), points: &[(f64, f64)]) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (x, y) in points {
        writeln!(out, "{},{}", format_g12(*x), format_g12(*y)).unwrap();
    }
    out
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
