//! Error reports against the exact matrix.

use serde::Serialize;

use crate::config::LrfConfig;
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, tail_singular_value, DenseMatrix, Factorization};
use crate::lowspace::{LowSpaceFactorization, LowSpaceState};
use crate::privacy::{Budget, PrivacyParams};
use crate::sketch::SketchPlan;
use crate::spectral::SpectralState;

pub const ZETA_LABEL: &str = "theory-shape bound";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Spectral,
    Lowspace,
}

impl Algorithm {
    /// Number of Gaussian releases made by one finalize.
    pub fn releases(self) -> u32 {
        match self {
            Algorithm::Spectral => 2,
            Algorithm::Lowspace => 3,
        }
    }

    /// Multiplicative factor in front of `σ_{k+1}(A)` in the error bound.
    pub fn gamma(self, alpha: f64) -> f64 {
        let g = (1.0 + alpha) / (1.0 - alpha).powi(2);
        match self {
            Algorithm::Spectral => g,
            Algorithm::Lowspace => g * g,
        }
    }

    /// Additive-error shape scaled by `constant`. For the low-space path the
    /// padding `σ_min` is added in full.
    pub fn zeta(self, params: &PrivacyParams, plan: &SketchPlan, m: usize, n: usize, constant: f64) -> f64 {
        let a = params.alpha;
        let sk = (plan.k as f64).sqrt();
        let root = |x: usize| (x as f64).sqrt();
        match self {
            Algorithm::Spectral => {
                let basis = (1.0 + a) / (1.0 - a) * params.rho / (1.0 - a).sqrt() * (sk + root(m));
                let regression = 2.0 / (1.0 - a) * params.rho * (root(plan.v) + root(n));
                constant * (basis + regression)
            }
            Algorithm::Lowspace => {
                let basis = params.rho1 / (1.0 - a).sqrt() * (sk + root(m + n));
                let regression = params.rho2 * root(plan.v);
                constant * (basis + regression) + params.sigma_min
            }
        }
    }
}

/// Noise calibration and sketch sizes that `config` yields for `algorithm`.
pub fn calibration(config: &LrfConfig, algorithm: Algorithm) -> Result<(PrivacyParams, SketchPlan)> {
    Ok(match algorithm {
        Algorithm::Spectral => {
            let st = SpectralState::init(config)?;
            (*st.params(), *st.plan())
        }
        Algorithm::Lowspace => {
            let st = LowSpaceState::init(config)?;
            (*st.params(), *st.plan())
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub algorithm: Algorithm,
    pub k: usize,
    /// `‖A − M_k‖₂`; for the low-space path `‖(A | 0) − M_k‖₂`.
    pub spectral_error: f64,
    /// `‖A − M_k[:m, :n]‖₂`, low-space path only.
    pub restricted_error: Option<f64>,
    /// `σ_{k+1}(A)`.
    pub delta_k: f64,
    /// `spectral_error / delta_k`; `None` when `delta_k = 0`.
    pub mult_ratio: Option<f64>,
    pub mult_ratio_infinite: bool,
    pub gamma_theory: f64,
    /// `spectral_error − gamma_theory · delta_k`.
    pub additive_residual: f64,
    pub zeta_formula: f64,
    pub zeta_constant: f64,
    pub zeta_label: &'static str,
    pub budget_per_release: Budget,
    pub budget_composed: Budget,
    pub trials: usize,
    /// Fraction of trials with `spectral_error ≤ gamma·delta_k + zeta`.
    pub success_rate: f64,
}

impl ErrorReport {
    pub fn within_bound(&self) -> bool {
        self.additive_residual <= self.zeta_formula
    }
}

fn build(
    algorithm: Algorithm,
    a: &DenseMatrix,
    k: usize,
    spectral_error: f64,
    restricted_error: Option<f64>,
    params: &PrivacyParams,
    plan: &SketchPlan,
    zeta_constant: f64,
) -> Result<ErrorReport> {
    if k == 0 || k > a.nrows().min(a.ncols()) {
        return Err(Error::arg(format!("rank {k} invalid for a {}x{} matrix", a.nrows(), a.ncols())));
    }
    if !(zeta_constant >= 0.0 && zeta_constant.is_finite()) {
        return Err(Error::arg("zeta constant must be finite and nonnegative"));
    }
    let delta_k = tail_singular_value(a, k);
    let gamma = algorithm.gamma(params.alpha);
    let (mult_ratio, infinite) = if delta_k > 0.0 {
        (Some(spectral_error / delta_k), false)
    } else {
        (None, spectral_error > 0.0)
    };
    let additive_residual = spectral_error - gamma * delta_k;
    let zeta_formula = algorithm.zeta(params, plan, a.nrows(), a.ncols(), zeta_constant);
    let per = params.per_release();
    Ok(ErrorReport {
        algorithm,
        k,
        spectral_error,
        restricted_error,
        delta_k,
        mult_ratio,
        mult_ratio_infinite: infinite,
        gamma_theory: gamma,
        additive_residual,
        zeta_formula,
        zeta_constant,
        zeta_label: ZETA_LABEL,
        budget_per_release: per,
        budget_composed: per.composed(algorithm.releases()),
        trials: 1,
        success_rate: if additive_residual <= zeta_formula { 1.0 } else { 0.0 },
    })
}

pub fn evaluate_spectral(
    a: &DenseMatrix,
    f: &Factorization,
    params: &PrivacyParams,
    plan: &SketchPlan,
    zeta_constant: f64,
) -> Result<ErrorReport> {
    if (f.u.nrows(), f.v.nrows()) != a.shape() {
        return Err(Error::arg(format!(
            "factorization is {}x{}, matrix is {}x{}",
            f.u.nrows(),
            f.v.nrows(),
            a.nrows(),
            a.ncols()
        )));
    }
    let err = spectral_norm(&(a - f.reconstruct()));
    build(Algorithm::Spectral, a, f.k(), err, None, params, plan, zeta_constant)
}

pub fn evaluate_lowspace(
    a: &DenseMatrix,
    f: &LowSpaceFactorization,
    params: &PrivacyParams,
    plan: &SketchPlan,
    zeta_constant: f64,
) -> Result<ErrorReport> {
    let err = f.padded_error(a)?;
    let restricted = f.restricted_error(a)?;
    build(Algorithm::Lowspace, a, f.padded.k(), err, Some(restricted), params, plan, zeta_constant)
}

/// Pools single-run reports of the same configuration. Averages the error
/// fields; `None` ratios stay `None` if any run had one.
pub fn pool(reports: &[ErrorReport]) -> Result<ErrorReport> {
    let first = reports.first().ok_or_else(|| Error::arg("no reports to pool"))?;
    let count = reports.len() as f64;
    let mean = |f: &dyn Fn(&ErrorReport) -> f64| reports.iter().map(f).sum::<f64>() / count;
    let mut out = first.clone();
    out.spectral_error = mean(&|r| r.spectral_error);
    out.restricted_error = reports
        .iter()
        .map(|r| r.restricted_error)
        .sum::<Option<f64>>()
        .map(|s| s / count);
    out.additive_residual = out.spectral_error - out.gamma_theory * out.delta_k;
    out.mult_ratio = if reports.iter().all(|r| r.mult_ratio.is_some()) && out.delta_k > 0.0 {
        Some(out.spectral_error / out.delta_k)
    } else {
        None
    };
    out.mult_ratio_infinite = reports.iter().any(|r| r.mult_ratio_infinite);
    out.trials = reports.iter().map(|r| r.trials).sum();
    out.success_rate =
        reports.iter().map(|r| r.success_rate * r.trials as f64).sum::<f64>() / out.trials as f64;
    Ok(out)
}
