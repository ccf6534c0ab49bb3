// Fixed-point sketch accumulators.
//
// Every increment is rounded once to a multiple of 2^-FRAC_BITS and then added
// as an integer. Integer addition is associative, so the accumulated sketch is
// the same bit pattern for any update order and any sharding of the stream.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const FRAC_BITS: i32 = 60;
const ONE: f64 = (1u64 << FRAC_BITS) as f64;
// Keep quantized increments far from the i128 limits so that sums of many of
// them are caught by checked arithmetic rather than by the cast saturating.
const LIMIT: f64 = 1.7e38 / 4.0;

#[inline]
fn quantize(x: f64) -> Result<i128> {
    let y = (x * ONE).round();
    if !y.is_finite() || y.abs() >= LIMIT {
        return Err(Error::Overflow);
    }
    Ok(y as i128)
}

#[inline]
fn dequantize(q: i128) -> f64 {
    q as f64 / ONE
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_dense(a: &DenseMatrix) -> Result<Self> {
        let mut out = Self::zeros(a.nrows(), a.ncols());
        for r in 0..a.nrows() {
            for c in 0..a.ncols() {
                out.data[r * a.ncols() + c] = quantize(a[(r, c)])?;
            }
        }
        Ok(out)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |r, c| {
            dequantize(self.data[r * self.cols + c])
        })
    }

    fn commit(&mut self, positions: impl Iterator<Item = usize> + Clone, incs: &[i128]) -> Result<()> {
        // Check every sum first so a failed update leaves the state untouched.
        for (p, &d) in positions.clone().zip(incs) {
            self.data[p].checked_add(d).ok_or(Error::Overflow)?;
        }
        for (p, &d) in positions.zip(incs) {
            self.data[p] += d;
        }
        Ok(())
    }

    /// Row `i` += `s · values`.
    pub fn add_row_scaled(&mut self, i: usize, s: f64, values: &[f64]) -> Result<()> {
        debug_assert_eq!(values.len(), self.cols);
        let incs = values.iter().map(|v| quantize(s * v)).collect::<Result<Vec<_>>>()?;
        let base = i * self.cols;
        self.commit(base..base + self.cols, &incs)
    }

    /// Column `j` += `s · values`.
    pub fn add_col_scaled(&mut self, j: usize, s: f64, values: &[f64]) -> Result<()> {
        debug_assert_eq!(values.len(), self.rows);
        let incs = values.iter().map(|v| quantize(s * v)).collect::<Result<Vec<_>>>()?;
        let cols = self.cols;
        self.commit((0..self.rows).map(|r| r * cols + j), &incs)
    }

    /// `self += s · col · rowᵀ`.
    pub fn add_outer_scaled(&mut self, s: f64, col: &[f64], row: &[f64]) -> Result<()> {
        debug_assert_eq!(col.len(), self.rows);
        debug_assert_eq!(row.len(), self.cols);
        let mut incs = Vec::with_capacity(self.data.len());
        for &a in col {
            let sa = s * a;
            for &b in row {
                incs.push(quantize(sa * b)?);
            }
        }
        self.commit(0..self.data.len(), &incs)
    }

    pub fn add_assign(&mut self, other: &ExactMatrix) -> Result<()> {
        debug_assert_eq!(self.shape(), other.shape());
        self.commit(0..self.data.len(), &other.data)
    }

    pub fn negated(&self) -> Self {
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }
}
