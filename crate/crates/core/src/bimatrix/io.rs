//! Matrix text formats.
//!
//! The pair format starts with a `N M` header followed by one `row col` pair
//! per line, 0-based. A first line containing a comma selects the dense CSV
//! format instead: one row of 0/1 values per line.

use std::fmt::Write as _;
use std::path::Path;

use super::{BinaryBipartiteMatrix, Remap};
use crate::{Error, Result};

pub fn read_matrix(path: &Path, strip_empty: bool) -> Result<(BinaryBipartiteMatrix, Remap)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix(&text, strip_empty).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => other,
    })
}

pub fn write_matrix(path: &Path, m: &BinaryBipartiteMatrix) -> Result<()> {
    std::fs::write(path, format_matrix(m)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn format_matrix(m: &BinaryBipartiteMatrix) -> String {
    let mut out = String::with_capacity(12 * m.nnz() + 16);
    let _ = writeln!(out, "{} {}", m.n_rows(), m.n_cols());
    for (i, a) in m.pairs() {
        let _ = writeln!(out, "{i} {a}");
    }
    out
}

pub fn parse_matrix(text: &str, strip_empty: bool) -> Result<(BinaryBipartiteMatrix, Remap)> {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.contains(',') {
        parse_dense(text, strip_empty)
    } else {
        parse_pairs(text, strip_empty)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: "<input>".into(),
        line: line as u64,
        message: message.into(),
    }
}

fn parse_pairs(text: &str, strip_empty: bool) -> Result<(BinaryBipartiteMatrix, Remap)> {
    let mut header = None;
    let mut pairs = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(
                line_no,
                format!("expected two fields, got {}", fields.len()),
            ));
        }
        let a: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad integer `{}`", fields[0])))?;
        let b: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad integer `{}`", fields[1])))?;
        if header.is_none() {
            header = Some((a, b));
        } else {
            pairs.push((a, b));
        }
    }
    let (n, m) = header.ok_or_else(|| parse_err(1, "missing `N M` header"))?;
    BinaryBipartiteMatrix::from_edge_list(&pairs, n, m, strip_empty)
}

fn parse_dense(text: &str, strip_empty: bool) -> Result<(BinaryBipartiteMatrix, Remap)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut pairs = Vec::new();
    let mut n_cols = None;
    let mut n_rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if *n_cols.get_or_insert(record.len()) != record.len() {
            return Err(parse_err(line, "ragged row"));
        }
        for (a, field) in record.iter().enumerate() {
            match field {
                "0" => {}
                "1" => pairs.push((n_rows, a)),
                other => return Err(parse_err(line, format!("expected 0 or 1, got `{other}`"))),
            }
        }
        n_rows += 1;
    }
    BinaryBipartiteMatrix::from_edge_list(&pairs, n_rows, n_cols.unwrap_or(0), strip_empty)
}
