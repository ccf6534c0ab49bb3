//! Monte-Carlo check that the sketches do not inflate neighboring
//! differences: `‖S·E‖_F² ≤ (1+α)‖E‖_F²` and `‖E·Φ‖_F² ≤ (1+α)‖E‖_F²`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::neighbors::{priv1_difference, priv2_difference};
use crate::linalg::DenseMatrix;
use crate::seed::{derive, tag};
use crate::sketch::{GaussianSketch, SrhtSketch};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SensitivityConfig {
    pub m: usize,
    pub n: usize,
    pub t: usize,
    pub v: usize,
    pub alpha: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GranularityResult {
    pub passes: usize,
    pub rate: f64,
    /// Largest observed `‖sketched E‖_F² / ‖E‖_F²` over both sketches.
    pub worst_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub config: SensitivityConfig,
    pub priv1: GranularityResult,
    pub priv2: GranularityResult,
    /// Required pass rate `1 − δ − 0.02`.
    pub threshold: f64,
    pub pass: bool,
}

/// Largest inflation ratio of `E` under `S` (left) and `Φ` (right); zero for `E = 0`.
pub fn inflation(e: &DenseMatrix, s: &SrhtSketch, phi: &DenseMatrix) -> Result<f64> {
    let base = e.norm_squared();
    if base == 0.0 {
        return Ok(0.0);
    }
    let left = s.apply(e)?.norm_squared() / base;
    let right = (e * phi).norm_squared() / base;
    Ok(left.max(right))
}

pub fn sensitivity_check(cfg: &SensitivityConfig) -> Result<SensitivityReport> {
    if cfg.m == 0 || cfg.n == 0 || cfg.t == 0 || cfg.trials == 0 {
        return Err(Error::arg("dimensions, t and trials must be positive"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0 && cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::arg("alpha and delta must lie in (0, 1)"));
    }
    let bound = 1.0 + cfg.alpha;
    let mut ratios1 = Vec::with_capacity(cfg.trials);
    let mut ratios2 = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials as u64 {
        let seed = cfg.seed.wrapping_add(trial);
        let phi = GaussianSketch::new(cfg.n, cfg.t, 1.0 / cfg.t as f64, derive(seed, tag::PHI))?.materialize();
        let s = SrhtSketch::new(
            cfg.v,
            cfg.m,
            derive(seed, tag::SRHT_S_SIGNS),
            derive(seed, tag::SRHT_S_PERM),
            true,
        )?;
        let e1 = priv1_difference(cfg.m, cfg.n, derive(seed, tag::NOISE_FIRST));
        let e2 = priv2_difference(cfg.m, cfg.n, derive(seed, tag::NOISE_SECOND));
        ratios1.push(inflation(&e1, &s, &phi)?);
        ratios2.push(inflation(&e2, &s, &phi)?);
    }
    let summarize = |r: &[f64]| {
        let passes = r.iter().filter(|&&x| x <= bound).count();
        GranularityResult {
            passes,
            rate: passes as f64 / r.len() as f64,
            worst_ratio: r.iter().copied().fold(0.0, f64::max),
        }
    };
    let priv1 = summarize(&ratios1);
    let priv2 = summarize(&ratios2);
    let threshold = 1.0 - cfg.delta - 0.02;
    let pass = priv1.rate >= threshold && priv2.rate >= threshold;
    Ok(SensitivityReport {
        config: *cfg,
        priv1,
        priv2,
        threshold,
        pass,
    })
}
