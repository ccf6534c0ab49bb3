//! Plain-text turnstile streams.
//!
//! ```text
//! # comment
//! m n [T]
//! i j s
//! ...
//! ```
//!
//! Indices are 0-based. Values are written with Rust's shortest round-trip
//! formatting, so write → read → write reproduces the same bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::spectral::TurnstileUpdate;

#[derive(Clone, Debug, PartialEq)]
pub struct StreamFile {
    pub m: usize,
    pub n: usize,
    pub horizon: Option<u64>,
    pub updates: Vec<TurnstileUpdate>,
}

/// Densification refuses matrices with more entries than this.
pub const MAX_DENSE_ENTRIES: usize = 10_000_000;

impl StreamFile {
    pub fn new(m: usize, n: usize) -> Self {
        StreamFile {
            m,
            n,
            horizon: None,
            updates: Vec::new(),
        }
    }

    /// Sum of all updates as a dense matrix.
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        match self.m.checked_mul(self.n) {
            Some(size) if size <= MAX_DENSE_ENTRIES => {}
            _ => {
                return Err(Error::arg(format!(
                    "{}x{} matrix exceeds the densification limit of {MAX_DENSE_ENTRIES} entries",
                    self.m, self.n
                )))
            }
        }
        let mut a = DenseMatrix::zeros(self.m, self.n);
        for u in &self.updates {
            a[(u.i, u.j)] += u.s;
        }
        Ok(a)
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(16 * (self.updates.len() + 1));
        match self.horizon {
            Some(t) => writeln!(out, "{} {} {}", self.m, self.n, t),
            None => writeln!(out, "{} {}", self.m, self.n),
        }
        .unwrap();
        for u in &self.updates {
            writeln!(out, "{} {} {:?}", u.i, u.j, u.s).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<StreamFile> {
        let mut header: Option<StreamFile> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let perr = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            match header.as_mut() {
                None => {
                    if fields.len() != 2 && fields.len() != 3 {
                        return Err(perr(format!("expected header 'm n [T]', found '{line}'")));
                    }
                    let m = parse_field::<usize>(fields[0], "m").map_err(perr)?;
                    let n = parse_field::<usize>(fields[1], "n").map_err(perr)?;
                    if m == 0 || n == 0 {
                        return Err(perr("matrix dimensions must be positive".into()));
                    }
                    let horizon = match fields.get(2) {
                        Some(f) => Some(parse_field::<u64>(f, "T").map_err(perr)?),
                        None => None,
                    };
                    header = Some(StreamFile {
                        m,
                        n,
                        horizon,
                        updates: Vec::new(),
                    });
                }
                Some(file) => {
                    if fields.len() != 3 {
                        return Err(perr(format!("expected update 'i j s', found '{line}'")));
                    }
                    let i = parse_field::<usize>(fields[0], "i").map_err(perr)?;
                    let j = parse_field::<usize>(fields[1], "j").map_err(perr)?;
                    let s = parse_field::<f64>(fields[2], "s").map_err(perr)?;
                    if i >= file.m || j >= file.n {
                        return Err(perr(format!(
                            "update ({i}, {j}) outside the {}x{} header bounds",
                            file.m, file.n
                        )));
                    }
                    if !s.is_finite() {
                        return Err(perr(format!("non-finite value {s}")));
                    }
                    file.updates.push(TurnstileUpdate::new(i, j, s));
                }
            }
        }
        header.ok_or(Error::Parse {
            line: 0,
            message: "missing header line".into(),
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<StreamFile> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, name: &str) -> std::result::Result<T, String> {
    field
        .parse()
        .map_err(|_| format!("cannot parse {name} from '{field}'"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_and_updates() {
        let f = StreamFile::parse("# demo\n4 4\n2 3 5.0\n\n0 1 -1e-3 # trailing\n").unwrap();
        assert_eq!((f.m, f.n, f.horizon), (4, 4, None));
        assert_eq!(f.updates, vec![TurnstileUpdate::new(2, 3, 5.0), TurnstileUpdate::new(0, 1, -1e-3)]);
    }

    #[test]
    fn bounds_and_syntax_errors_carry_line_numbers() {
        match StreamFile::parse("4 4\n5 3 1.0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match StreamFile::parse("4 4 8\n1 1 1\n1 x 2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(StreamFile::parse("# nothing\n").is_err());
        assert!(StreamFile::parse("4\n").is_err());
        assert!(StreamFile::parse("4 4\n1 1 NaN\n").is_err());
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let mut f = StreamFile::new(3, 5);
        f.horizon = Some(16);
        for (i, s) in [0.1, -2.5e-17, 1.0 / 3.0, 12345.678, -0.0].into_iter().enumerate() {
            f.updates.push(TurnstileUpdate::new(i % 3, i, s));
        }
        let text = f.render();
        let back = StreamFile::parse(&text).unwrap();
        assert_eq!(back.render(), text);
        assert_eq!(back.updates.len(), 5);
        for (a, b) in back.updates.iter().zip(&f.updates) {
            assert_eq!(a.s.to_bits(), b.s.to_bits());
        }
    }

    #[test]
    fn densify() {
        let f = StreamFile::parse("2 2\n0 0 1\n0 0 2\n1 0 -1\n").unwrap();
        assert_eq!(f.to_dense().unwrap(), DenseMatrix::from_row_slice(2, 2, &[3.0, 0.0, -1.0, 0.0]));
        let huge = StreamFile::new(100_000, 1_000);
        assert!(huge.to_dense().is_err());
    }
}
