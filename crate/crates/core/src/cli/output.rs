use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::spectral::{DiversificationCurve, Portfolio};

/// Significant digits of CSV values.
pub const CSV_DIGITS: usize = 12;

/// `%g`-style formatting with `digits` significant digits: fixed notation for
/// decimal exponents in `[-5, digits)`, scientific otherwise, trailing zeros removed.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn header(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("xi{j}")).collect()
}

fn push_row(out: &mut String, xi: &Portfolio, values: &[f64]) {
    let fields: Vec<String> = xi.weights().iter().chain(values).map(|v| format_sig(*v, CSV_DIGITS)).collect();
    out.push_str(&fields.join(","));
    out.push('\n');
}

/// CSV text of a curve: header `xi1,...,xid,value`, one line per portfolio.
pub fn curve_csv(curve: &DiversificationCurve) -> String {
    let d = curve.dim().unwrap_or(2);
    let mut cols = header(d);
    cols.push("value".into());
    let mut out = cols.join(",");
    out.push('\n');
    for (xi, v) in curve.grid.iter().zip(&curve.values) {
        push_row(&mut out, xi, &[*v]);
    }
    out
}

/// Several value columns sharing one grid.
pub fn table_csv(grid: &[Portfolio], labels: &[String], columns: &[Vec<f64>]) -> String {
    let d = grid.first().map(Portfolio::dim).unwrap_or(2);
    let mut cols = header(d);
    cols.extend(labels.iter().cloned());
    let mut out = cols.join(",");
    out.push('\n');
    for (i, xi) in grid.iter().enumerate() {
        let row: Vec<f64> = columns.iter().map(|c| c[i]).collect();
        push_row(&mut out, xi, &row);
    }
    out
}

pub fn emit_curve_csv(curve: &DiversificationCurve, path: &Path) -> Result<()> {
    write_text(path, &curve_csv(curve))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}
