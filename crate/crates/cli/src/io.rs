//! Plain-text matrix and label files.
//!
//! Matrices are CSV: one row per line, values separated by `,`, every line
//! (including the last) terminated by `\n`, no header. Labels hold one
//! integer per line. Floats are written with Rust's shortest round-trip
//! formatting, so a write followed by a read reproduces every value exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use sparse_spectral::Partition;

use crate::error::{CliError, CliResult};

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Reads a dense matrix.
pub fn ingest_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    parse_matrix(&read(path)?, path)
}

pub fn parse_matrix(text: &str, path: &Path) -> CliResult<DMatrix<f64>> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            return Err(parse_error(path, lineno, "empty line"));
        }
        let start = values.len();
        for token in line.split(',') {
            let v: f64 = token
                .trim()
                .parse()
                .map_err(|_| parse_error(path, lineno, format!("not a number: {token:?}")))?;
            if !v.is_finite() {
                return Err(parse_error(
                    path,
                    lineno,
                    format!("non-finite value {token:?}"),
                ));
            }
            values.push(v);
        }
        let width = values.len() - start;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(parse_error(
                    path,
                    lineno,
                    format!("expected {c} values, found {width}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_error(path, 1, "empty matrix file"))?;
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

/// Reads labels, compacting the distinct values to `0..k` in ascending
/// order.
pub fn ingest_labels(path: &Path) -> CliResult<Partition> {
    parse_labels(&read(path)?, path)
}

pub fn parse_labels(text: &str, path: &Path) -> CliResult<Partition> {
    let raw = text
        .lines()
        .enumerate()
        .map(|(idx, line)| {
            line.trim()
                .parse::<i64>()
                .map_err(|_| parse_error(path, idx + 1, format!("not an integer label: {line:?}")))
        })
        .collect::<CliResult<Vec<i64>>>()?;
    if raw.is_empty() {
        return Err(parse_error(path, 1, "no labels"));
    }
    Ok(Partition::from_raw(&raw))
}

pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{}", m[(i, j)]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn format_labels(p: &Partition) -> String {
    p.labels().iter().map(|l| format!("{l}\n")).collect()
}

/// Writes `contents` to a temporary file next to `path`, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}
