//! Run configuration shared by the spectral, low-space and continual algorithms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::privacy::Epsilon;
use crate::sketch::{plan_dimensions, SketchPlan};
use crate::spectral::TurnstileUpdate;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LrfConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub epsilon: Epsilon,
    pub delta: f64,
    pub seed: u64,
    /// Explicit sketch width; planned from `(k, α, δ, c_t)` when absent.
    pub t: Option<usize>,
    /// Explicit SRHT output rows; planned when absent.
    pub v: Option<usize>,
    pub c_t: f64,
    pub c_v: f64,
}

impl LrfConfig {
    /// Non-private configuration with `α = 0.5`, `δ = 0.01`, seed 0 and
    /// planned sketch sizes.
    pub fn new(m: usize, n: usize, k: usize) -> Self {
        LrfConfig {
            m,
            n,
            k,
            alpha: 0.5,
            epsilon: Epsilon::Infinite,
            delta: 0.01,
            seed: 0,
            t: None,
            v: None,
            c_t: 1.0,
            c_v: 1.0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_epsilon(mut self, epsilon: Epsilon) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sketch_sizes(mut self, t: Option<usize>, v: Option<usize>) -> Self {
        self.t = t;
        self.v = v;
        self
    }

    pub fn with_planning_constants(mut self, c_t: f64, c_v: f64) -> Self {
        self.c_t = c_t;
        self.c_v = c_v;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::arg("matrix dimensions must be positive"));
        }
        let bound = self.m.min(self.n);
        if self.k == 0 || self.k > bound {
            return Err(Error::arg(format!("rank {} outside [1, {bound}]", self.k)));
        }
        Ok(())
    }

    /// Planned (or overridden) sketch sizes with `v` limited to `srht_limit`.
    pub(crate) fn plan(&self, srht_limit: usize) -> Result<SketchPlan> {
        Ok(plan_dimensions(self.k, self.alpha, self.delta, self.c_t, self.c_v)?
            .with_overrides(self.t, self.v)?
            .capped_to(srht_limit))
    }
}

/// External matrix shape and whether the algorithm works on the transpose.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Orientation {
    pub rows: usize,
    pub cols: usize,
    pub transposed: bool,
}

impl Orientation {
    /// Internal `(rows, cols)` seen by the sketches.
    pub fn internal(&self) -> (usize, usize) {
        if self.transposed {
            (self.cols, self.rows)
        } else {
            (self.rows, self.cols)
        }
    }

    /// Validates an external update and maps it to internal coordinates.
    pub(crate) fn map(&self, u: &TurnstileUpdate) -> Result<(usize, usize, f64)> {
        if u.i >= self.rows {
            return Err(Error::IndexOutOfRange {
                what: "row",
                index: u.i,
                bound: self.rows,
            });
        }
        if u.j >= self.cols {
            return Err(Error::IndexOutOfRange {
                what: "column",
                index: u.j,
                bound: self.cols,
            });
        }
        if !u.s.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite update value {}", u.s)));
        }
        Ok(if self.transposed {
            (u.j, u.i, u.s)
        } else {
            (u.i, u.j, u.s)
        })
    }
}
