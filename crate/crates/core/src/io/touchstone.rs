//! Version-1 two-port Touchstone files in real/imaginary format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::netcore::{Complex, SParams2};

/// One frequency point of a two-port file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TouchstoneRow {
    pub freq_hz: f64,
    pub s: SParams2,
}

/// Text of a `# GHz S RI R <z0>` file. Values carry 17 significant digits.
pub fn touchstone_text(rows: &[TouchstoneRow], z0: f64) -> Result<String> {
    check_increasing(rows.iter().map(|r| r.freq_hz))?;
    let mut out = String::from("! two-port S-parameters, real/imaginary\n");
    let _ = writeln!(out, "# GHz S RI R {z0}");
    for r in rows {
        let _ = write!(out, "{:.16e}", r.freq_hz / 1e9);
        for s in [r.s.s11, r.s.s21, r.s.s12, r.s.s22] {
            let _ = write!(out, " {:.16e} {:.16e}", s.re, s.im);
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_touchstone(rows: &[TouchstoneRow], z0: f64, path: &Path) -> Result<()> {
    fs::write(path, touchstone_text(rows, z0)?)?;
    Ok(())
}

fn check_increasing(freqs: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for (i, f) in freqs.enumerate() {
        if !(f > prev) || !f.is_finite() {
            return Err(Error::Touchstone(format!("data row {}: frequency {f} is not increasing", i + 1)));
        }
        prev = f;
    }
    Ok(())
}

fn unit_scale(token: &str) -> Option<f64> {
    match token.to_ascii_lowercase().as_str() {
        "hz" => Some(1.0),
        "khz" => Some(1e3),
        "mhz" => Some(1e6),
        "ghz" => Some(1e9),
        _ => None,
    }
}

/// Parses the option line; returns the frequency scale and the reference
/// resistance.
fn parse_options(line: &str) -> Result<(f64, f64)> {
    let bad = |why: &str| Error::Touchstone(format!("option line `{line}`: {why}"));
    let tokens: Vec<&str> = line.trim_start_matches('#').split_whitespace().collect();
    let [unit, kind, format, r, z0] = tokens.as_slice() else {
        return Err(bad("expected `# <unit> S RI R <ohms>`"));
    };
    let scale = unit_scale(unit).ok_or_else(|| bad("unknown frequency unit"))?;
    if !kind.eq_ignore_ascii_case("s") {
        return Err(bad("only S parameters are supported"));
    }
    if !format.eq_ignore_ascii_case("ri") {
        return Err(bad("only the RI format is supported"));
    }
    if !r.eq_ignore_ascii_case("r") {
        return Err(bad("missing reference resistance"));
    }
    let z0: f64 = z0.parse().map_err(|_| bad("reference resistance is not a number"))?;
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(bad("reference resistance must be > 0"));
    }
    Ok((scale, z0))
}

/// Parses a two-port RI file. Returns the rows and the reference
/// resistance.
pub fn parse_touchstone(text: &str) -> Result<(Vec<TouchstoneRow>, f64)> {
    let mut options = None;
    let mut rows = Vec::new();
    for raw in text.lines() {
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if options.is_some() {
                return Err(Error::Touchstone("more than one option line".into()));
            }
            options = Some(parse_options(line)?);
            continue;
        }
        let (scale, z0) = options.ok_or_else(|| Error::Touchstone("data before the option line".into()))?;
        let index = rows.len() + 1;
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Touchstone(format!("data row {index}: non-numeric field")))?;
        if fields.len() != 9 {
            return Err(Error::Touchstone(format!("data row {index}: expected 9 fields, found {}", fields.len())));
        }
        let c = |k: usize| Complex::new(fields[k], fields[k + 1]);
        rows.push(TouchstoneRow {
            freq_hz: fields[0] * scale,
            s: SParams2 {
                s11: c(1),
                s21: c(3),
                s12: c(5),
                s22: c(7),
                z0_ohms: z0,
            },
        });
    }
    let (_, z0) = options.ok_or_else(|| Error::Touchstone("missing option line".into()))?;
    check_increasing(rows.iter().map(|r| r.freq_hz))?;
    Ok((rows, z0))
}

pub fn read_touchstone(path: &Path) -> Result<(Vec<TouchstoneRow>, f64)> {
    parse_touchstone(&fs::read_to_string(path)?)
}
