//! Matrix Market I/O (`coordinate` for matrices, `array` for vectors; `real`
//! or `complex` fields, `general` symmetry).

use std::io::{BufRead, Write};

use num_complex::Complex;

use super::csr::CsrMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn write_matrix<T: Real, W: Write>(a: &CsrMatrix<T>, mut out: W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate complex general")?;
    writeln!(out, "{} {} {}", a.n(), a.n(), a.nnz())?;
    for i in 0..a.n() {
        for (j, v) in a.row(i) {
            writeln!(out, "{} {} {:e} {:e}", i + 1, j + 1, v.re, v.im)?;
        }
    }
    Ok(())
}

pub fn write_vector<T: Real, W: Write>(v: &[Complex<T>], mut out: W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix array complex general")?;
    writeln!(out, "{} 1", v.len())?;
    for z in v {
        writeln!(out, "{:e} {:e}", z.re, z.im)?;
    }
    Ok(())
}

struct Header {
    coordinate: bool,
    complex: bool,
}

fn data_lines<R: BufRead>(input: R) -> Result<(Header, Vec<(usize, String)>)> {
    let mut lines = input.lines().enumerate();
    let (_, first) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    let first = first?;
    let tokens: Vec<String> = first.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse { line: 1, msg: "missing %%MatrixMarket matrix banner".into() });
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(Error::Parse { line: 1, msg: format!("unsupported format {other}") }),
    };
    let complex = match tokens[3].as_str() {
        "complex" => true,
        "real" => false,
        other => return Err(Error::Parse { line: 1, msg: format!("unsupported field {other}") }),
    };
    if tokens[4] != "general" {
        return Err(Error::Parse { line: 1, msg: format!("unsupported symmetry {}", tokens[4]) });
    }
    let mut rest = Vec::new();
    for (k, l) in lines {
        let l = l?;
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        rest.push((k + 1, t.to_string()));
    }
    Ok((Header { coordinate, complex }, rest))
}

fn parse<U: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<U> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse { line, msg: "malformed entry".into() })
}

fn parse_value<T: Real>(toks: &mut std::str::SplitWhitespace<'_>, complex: bool, line: usize) -> Result<Complex<T>> {
    let re: f64 = parse(toks.next(), line)?;
    let im: f64 = if complex { parse(toks.next(), line)? } else { 0.0 };
    Ok(Complex::new(T::lit(re), T::lit(im)))
}

pub fn read_matrix<T: Real, R: BufRead>(input: R) -> Result<CsrMatrix<T>> {
    let (h, lines) = data_lines(input)?;
    if !h.coordinate {
        return Err(Error::Parse { line: 1, msg: "matrices must use coordinate format".into() });
    }
    let (size_line, size) = lines.first().ok_or(Error::Parse { line: 2, msg: "missing size line".into() })?;
    let mut t = size.split_whitespace();
    let rows: usize = parse(t.next(), *size_line)?;
    let cols: usize = parse(t.next(), *size_line)?;
    let nnz: usize = parse(t.next(), *size_line)?;
    if rows != cols {
        return Err(Error::Parse { line: *size_line, msg: "matrix must be square".into() });
    }
    if lines.len() - 1 != nnz {
        return Err(Error::Parse { line: *size_line, msg: format!("expected {nnz} entries, found {}", lines.len() - 1) });
    }
    let mut trips = Vec::with_capacity(nnz);
    for (ln, l) in &lines[1..] {
        let mut t = l.split_whitespace();
        let i: usize = parse(t.next(), *ln)?;
        let j: usize = parse(t.next(), *ln)?;
        if i == 0 || j == 0 {
            return Err(Error::Parse { line: *ln, msg: "indices are 1-based".into() });
        }
        trips.push((i - 1, j - 1, parse_value(&mut t, h.complex, *ln)?));
    }
    CsrMatrix::from_triplets(rows, &trips)
}

pub fn read_vector<T: Real, R: BufRead>(input: R) -> Result<Vec<Complex<T>>> {
    let (h, lines) = data_lines(input)?;
    if h.coordinate {
        return Err(Error::Parse { line: 1, msg: "vectors must use array format".into() });
    }
    let (size_line, size) = lines.first().ok_or(Error::Parse { line: 2, msg: "missing size line".into() })?;
    let mut t = size.split_whitespace();
    let rows: usize = parse(t.next(), *size_line)?;
    let cols: usize = parse(t.next(), *size_line)?;
    if cols != 1 || lines.len() - 1 != rows {
        return Err(Error::Parse { line: *size_line, msg: "expected a single column of matching length".into() });
    }
    lines[1..]
        .iter()
        .map(|(ln, l)| parse_value(&mut l.split_whitespace(), h.complex, *ln))
        .collect()
}
