//! Random sketch matrices and the sketch-dimension planner.
//!
//! Gaussian sketches multiply the matrix from the right (`A·Φ`) or left (`Ψ·A`);
//! subsampled randomized Hadamard transforms (SRHT) compress from the left
//! (`S·A`). Both are reproducible from their seeds and can hand out a single
//! row or column without being materialized, which keeps a turnstile update at
//! `O(t + v)` work.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Sketch dimensions and the parameters that produced them.
///
/// Planned values follow
/// `η = max{k², ⌈1/α⌉}`,
/// `t = ⌈c_t·η·α⁻¹·ln(k/α)·ln(1/δ)⌉` (at least `k+1`) and
/// `v = ⌈c_v·η·α⁻³·ln(t/α)·ln(1/δ)⌉` (at least `t`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SketchPlan {
    pub k: usize,
    pub alpha: f64,
    pub delta: f64,
    pub eta: usize,
    pub t: usize,
    pub v: usize,
    pub c_t: f64,
    pub c_v: f64,
    /// `t` or `v` was set explicitly instead of planned.
    pub overridden: bool,
    /// `v` (and possibly `t`) was reduced to fit the SRHT's padded dimension.
    pub capped: bool,
}

pub fn plan_dimensions(k: usize, alpha: f64, delta: f64, c_t: f64, c_v: f64) -> Result<SketchPlan> {
    if k == 0 {
        return Err(Error::arg("target rank k must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::arg(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(c_t > 0.0 && c_t.is_finite() && c_v > 0.0 && c_v.is_finite()) {
        return Err(Error::arg("planning constants must be positive and finite"));
    }
    let kf = k as f64;
    let eta = (k * k).max((1.0 / alpha).ceil() as usize);
    let log_delta = (1.0 / delta).ln();
    let t_raw = c_t * eta as f64 / alpha * (kf / alpha).ln() * log_delta;
    let t = to_count(t_raw)?.max(k + 1);
    let v_raw = c_v * eta as f64 / alpha.powi(3) * (t as f64 / alpha).ln() * log_delta;
    let v = to_count(v_raw)?.max(t);
    Ok(SketchPlan {
        k,
        alpha,
        delta,
        eta,
        t,
        v,
        c_t,
        c_v,
        overridden: false,
        capped: false,
    })
}

fn to_count(x: f64) -> Result<usize> {
    let c = x.ceil();
    if !c.is_finite() || c > 1e12 {
        return Err(Error::arg(format!("planned sketch dimension {x} is too large")));
    }
    Ok(c.max(1.0) as usize)
}

impl SketchPlan {
    /// Replaces the planned `t` and/or `v`. An explicit `t` raises a planned `v`
    /// that would fall below it; the result must satisfy `k ≤ t ≤ v`.
    pub fn with_overrides(mut self, t: Option<usize>, v: Option<usize>) -> Result<Self> {
        if t.is_none() && v.is_none() {
            return Ok(self);
        }
        let new_t = t.unwrap_or(self.t);
        let new_v = match v {
            Some(v) => v,
            None => self.v.max(new_t),
        };
        let new_t = if t.is_none() { new_t.min(new_v) } else { new_t };
        if new_t < self.k || new_v < new_t {
            return Err(Error::arg(format!(
                "sketch sizes must satisfy k <= t <= v (k={}, t={new_t}, v={new_v})",
                self.k
            )));
        }
        self.t = new_t;
        self.v = new_v;
        self.overridden = true;
        Ok(self)
    }

    /// Limits `v` to `limit` (the SRHT padded dimension) and keeps `t ≤ v`.
    pub fn capped_to(mut self, limit: usize) -> Self {
        if self.v > limit {
            self.v = limit;
            self.t = self.t.min(limit);
            self.capped = true;
        }
        self
    }
}

/// Seeded matrix with i.i.d. `N(0, variance)` entries.
///
/// Row `j` is drawn from its own ChaCha stream, so rows can be regenerated
/// independently of each other.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSketch {
    rows: usize,
    cols: usize,
    variance: f64,
    seed: u64,
}

impl GaussianSketch {
    pub fn new(rows: usize, cols: usize, variance: f64, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::arg("gaussian sketch dimensions must be positive"));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::arg(format!("variance must be positive, got {variance}")));
        }
        Ok(GaussianSketch {
            rows,
            cols,
            variance,
            seed,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, j: usize) -> Result<Vec<f64>> {
        if j >= self.rows {
            return Err(Error::IndexOutOfRange {
                what: "gaussian sketch row",
                index: j,
                bound: self.rows,
            });
        }
        Ok(self.row_unchecked(j))
    }

    fn row_unchecked(&self, j: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(j as u64);
        let std = self.variance.sqrt();
        (0..self.cols)
            .map(|_| std * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    pub fn materialize(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for j in 0..self.rows {
            let row = self.row_unchecked(j);
            for (c, x) in row.into_iter().enumerate() {
                out[(j, c)] = x;
            }
        }
        out
    }
}

/// Entry `(a, b)` of the Sylvester–Hadamard matrix, `(-1)^{popcount(a & b)}`.
#[inline]
fn walsh(a: usize, b: usize) -> f64 {
    if (a & b).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// In-place unnormalized fast Walsh–Hadamard transform (`x ← H_n x`).
pub fn fwht(x: &mut [f64]) {
    let n = x.len();
    assert!(n.is_power_of_two(), "fwht length must be a power of two");
    let mut h = 1;
    while h < n {
        for block in x.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (p, q) = (*a, *b);
                *a = p + q;
                *b = p - q;
            }
        }
        h *= 2;
    }
}

/// Walsh–Hadamard matrix built by the recursion `H_n = [[H, H], [H, −H]]`, `H_1 = 1`.
pub fn hadamard(n: usize) -> Result<DenseMatrix> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::arg(format!("hadamard order must be a power of two, got {n}")));
    }
    let mut h = DenseMatrix::from_element(1, 1, 1.0);
    while h.nrows() < n {
        let s = h.nrows();
        let mut next = DenseMatrix::zeros(2 * s, 2 * s);
        next.view_mut((0, 0), (s, s)).copy_from(&h);
        next.view_mut((0, s), (s, s)).copy_from(&h);
        next.view_mut((s, 0), (s, s)).copy_from(&h);
        next.view_mut((s, s), (s, s)).copy_from(&(-&h));
        h = next;
    }
    Ok(h)
}

/// Subsampled randomized Hadamard transform
/// `S = c · Π_{1..v} · (1/√m')·H_{m'} · D`, restricted to the first `m` columns.
///
/// `D` holds Rademacher signs, `Π_{1..v}` keeps the first `v` rows of a uniform
/// permutation and `m'` is `m` rounded up to a power of two. With `jlp_scaled`
/// the factor `c = √(m'/v)` makes `E‖Sx‖² = ‖x‖²`; without it `c = 1` and the
/// rows are orthonormal whenever `m = m'`.
#[derive(Clone, Debug, PartialEq)]
pub struct SrhtSketch {
    out_rows: usize,
    in_dim: usize,
    padded_dim: usize,
    sign_seed: u64,
    perm_seed: u64,
    jlp_scaled: bool,
    signs: Vec<f64>,
    selected: Vec<usize>,
    scale: f64,
}

impl SrhtSketch {
    pub fn new(v: usize, m: usize, sign_seed: u64, perm_seed: u64, jlp_scaled: bool) -> Result<Self> {
        if m == 0 {
            return Err(Error::arg("SRHT input dimension must be positive"));
        }
        let padded = m.next_power_of_two();
        if v == 0 || v > padded {
            return Err(Error::arg(format!(
                "SRHT output rows must lie in [1, {padded}] for input dimension {m}, got {v}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(sign_seed);
        let signs = (0..m)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();

        // Partial Fisher–Yates: the first v slots are a uniform ordered v-subset.
        let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
        let mut perm: Vec<usize> = (0..padded).collect();
        for i in 0..v {
            let j = rng.random_range(i..padded);
            perm.swap(i, j);
        }
        perm.truncate(v);

        let c = if jlp_scaled {
            (padded as f64 / v as f64).sqrt()
        } else {
            1.0
        };
        Ok(SrhtSketch {
            out_rows: v,
            in_dim: m,
            padded_dim: padded,
            sign_seed,
            perm_seed,
            jlp_scaled,
            signs,
            selected: perm,
            scale: c / (padded as f64).sqrt(),
        })
    }

    #[cfg(test)]
    fn fixed(signs: Vec<f64>, selected: Vec<usize>, jlp_scaled: bool) -> Self {
        let m = signs.len();
        let padded = m.next_power_of_two();
        let v = selected.len();
        let c = if jlp_scaled { (padded as f64 / v as f64).sqrt() } else { 1.0 };
        SrhtSketch {
            out_rows: v,
            in_dim: m,
            padded_dim: padded,
            sign_seed: 0,
            perm_seed: 0,
            jlp_scaled,
            signs,
            selected,
            scale: c / (padded as f64).sqrt(),
        }
    }

    pub fn out_rows(&self) -> usize {
        self.out_rows
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn padded_dim(&self) -> usize {
        self.padded_dim
    }

    pub fn is_jlp_scaled(&self) -> bool {
        self.jlp_scaled
    }

    pub fn seeds(&self) -> (u64, u64) {
        (self.sign_seed, self.perm_seed)
    }

    #[inline]
    fn entry(&self, r: usize, i: usize) -> f64 {
        self.scale * self.signs[i] * walsh(self.selected[r], i)
    }

    /// Column `i` of `S` (length `v`), computed from the Walsh functions.
    pub fn column(&self, i: usize) -> Result<Vec<f64>> {
        if i >= self.in_dim {
            return Err(Error::IndexOutOfRange {
                what: "SRHT column",
                index: i,
                bound: self.in_dim,
            });
        }
        Ok((0..self.out_rows).map(|r| self.entry(r, i)).collect())
    }

    /// `S · X` via one fast transform per column of `X`.
    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.nrows() != self.in_dim {
            return Err(Error::arg(format!(
                "SRHT expects {} rows, got {}",
                self.in_dim,
                x.nrows()
            )));
        }
        let mut out = DenseMatrix::zeros(self.out_rows, x.ncols());
        let mut buf = vec![0.0; self.padded_dim];
        for c in 0..x.ncols() {
            buf.iter_mut().for_each(|b| *b = 0.0);
            for (i, (b, s)) in buf.iter_mut().zip(&self.signs).enumerate() {
                *b = s * x[(i, c)];
            }
            fwht(&mut buf);
            for (r, &sel) in self.selected.iter().enumerate() {
                out[(r, c)] = self.scale * buf[sel];
            }
        }
        Ok(out)
    }

    pub fn materialize(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.out_rows, self.in_dim, |r, i| self.entry(r, i))
    }
}
