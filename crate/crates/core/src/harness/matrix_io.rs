//! Dense matrices as text: a "rows cols" header followed by one row per line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub fn render_matrix(a: &DenseMatrix) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", a.nrows(), a.ncols()).unwrap();
    for r in 0..a.nrows() {
        let row: Vec<String> = a.row(r).iter().map(|x| format!("{x:?}")).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "missing header line".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|f| f.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse {
            line: hline,
            message: format!("expected 'rows cols', found '{header}'"),
        })?;
    let &[rows, cols] = dims.as_slice() else {
        return Err(Error::Parse {
            line: hline,
            message: format!("expected 'rows cols', found '{header}'"),
        });
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (line, l) in lines {
        if seen == rows {
            return Err(Error::Parse {
                line,
                message: format!("more than {rows} rows"),
            });
        }
        let before = data.len();
        for f in l.split_whitespace() {
            data.push(f.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse '{f}' as a number"),
            })?);
        }
        if data.len() - before != cols {
            return Err(Error::Parse {
                line,
                message: format!("expected {cols} values, found {}", data.len() - before),
            });
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::Parse {
            line: 0,
            message: format!("expected {rows} rows, found {seen}"),
        });
    }
    Ok(DenseMatrix::from_row_slice(rows, cols, &data))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(a: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_matrix(a))?;
    Ok(())
}
