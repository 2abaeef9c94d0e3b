//! Plain-text persistence for affine problems.
//!
//! ```text
//! # minimax affine problem
//! format = minimax-affine/1
//! d_x = 2
//! d_y = 2
//! mu = 1.0000000000000000e0
//! lipschitz = 8.0000000000000000e0
//! matrix
//! <d rows of d space-separated entries, row-major>
//! offset
//! <one row of d entries>
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly. Lines starting with `#` and blank lines in the header are
//! ignored; unknown header keys are errors.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use super::{AffineMinimaxProblem, MinimaxProblem};
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "minimax-affine/1";

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_problem<W: Write>(problem: &AffineMinimaxProblem, mut out: W) -> Result<()> {
    let d = problem.dim();
    writeln!(out, "# minimax affine problem")?;
    writeln!(out, "format = {FORMAT_TAG}")?;
    writeln!(out, "d_x = {}", problem.d_x())?;
    writeln!(out, "d_y = {}", problem.d_y())?;
    writeln!(out, "mu = {}", fmt_real(problem.modulus()))?;
    writeln!(out, "lipschitz = {}", fmt_real(problem.smoothness()))?;
    writeln!(out, "matrix")?;
    let m = problem.matrix();
    for i in 0..d {
        let row: Vec<String> = (0..d).map(|j| fmt_real(m[(i, j)])).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    writeln!(out, "offset")?;
    let q: Vec<String> = problem.offset().iter().map(|&v| fmt_real(v)).collect();
    writeln!(out, "{}", q.join(" "))?;
    Ok(())
}

pub fn problem_to_string(problem: &AffineMinimaxProblem) -> String {
    let mut buf = Vec::new();
    write_problem(problem, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_row(line_no: usize, line: &str, expected: usize) -> Result<Vec<f64>> {
    let row = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|e| parse_err(line_no, format!("bad real `{tok}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if row.len() != expected {
        return Err(parse_err(
            line_no,
            format!("expected {expected} entries, found {}", row.len()),
        ));
    }
    Ok(row)
}

pub fn read_problem<R: BufRead>(input: R) -> Result<AffineMinimaxProblem> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (mut d_x, mut d_y, mut mu, mut lip) = (None, None, None, None);
    let mut format_seen = false;
    let mut next_data_line = |what: &str| -> Result<(usize, String)> {
        for (no, line) in lines.by_ref() {
            let line = line?;
            if !line.trim().is_empty() {
                return Ok((no, line));
            }
        }
        Err(parse_err(0, format!("unexpected end of input while reading {what}")))
    };

    loop {
        let (no, line) = next_data_line("header")?;
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if trimmed == "matrix" {
            break;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| parse_err(no, format!("expected `key = value`, got `{trimmed}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let int = |v: &str| v.parse::<usize>().map_err(|e| parse_err(no, format!("{key}: {e}")));
        let real = |v: &str| v.parse::<f64>().map_err(|e| parse_err(no, format!("{key}: {e}")));
        match key {
            "format" => {
                if value != FORMAT_TAG {
                    return Err(parse_err(no, format!("unsupported format `{value}`")));
                }
                format_seen = true;
            }
            "d_x" => d_x = Some(int(value)?),
            "d_y" => d_y = Some(int(value)?),
            "mu" => mu = Some(real(value)?),
            "lipschitz" => lip = Some(real(value)?),
            other => return Err(parse_err(no, format!("unknown key `{other}`"))),
        }
    }
    if !format_seen {
        return Err(parse_err(0, "missing `format` key"));
    }
    let missing = |k: &str| parse_err(0, format!("missing `{k}` key"));
    let d_x = d_x.ok_or_else(|| missing("d_x"))?;
    let d_y = d_y.ok_or_else(|| missing("d_y"))?;
    let mu = mu.ok_or_else(|| missing("mu"))?;
    let lip = lip.ok_or_else(|| missing("lipschitz"))?;
    let d = d_x + d_y;

    let mut rows = Vec::with_capacity(d * d);
    for _ in 0..d {
        let (no, line) = next_data_line("matrix")?;
        rows.extend(parse_row(no, &line, d)?);
    }
    let (no, line) = next_data_line("offset")?;
    if line.trim() != "offset" {
        return Err(parse_err(no, "expected `offset` section"));
    }
    let (no, line) = next_data_line("offset")?;
    let offset = parse_row(no, &line, d)?;
    let matrix = DMatrix::from_row_slice(d, d, &rows);
    AffineMinimaxProblem::new(matrix, offset, d_x, mu, lip)
}
