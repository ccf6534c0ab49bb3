//! Gaussian-mechanism calibration and seeded noise.
//!
//! This module only computes noise scales; it does not check
//! indistinguishability. See `harness::sensitivity` for the empirical check of
//! the sketch-sensitivity premise the scales rely on.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Privacy parameter ε. `Infinite` selects the non-private algorithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Epsilon {
    Finite(f64),
    Infinite,
}

impl Epsilon {
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Epsilon::Finite(value))
        } else {
            Err(Error::arg(format!("epsilon must be a positive finite number, got {value}")))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Epsilon::Infinite)
    }

    pub fn value(&self) -> f64 {
        match *self {
            Epsilon::Finite(e) => e,
            Epsilon::Infinite => f64::INFINITY,
        }
    }

    fn scaled(self, factor: f64) -> Self {
        match self {
            Epsilon::Finite(e) => Epsilon::Finite(e * factor),
            Epsilon::Infinite => Epsilon::Infinite,
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Finite(e) => write!(f, "{e}"),
            Epsilon::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Epsilon::Infinite),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::arg(format!("cannot parse epsilon from {s:?}")))?;
                if v == f64::INFINITY {
                    Ok(Epsilon::Infinite)
                } else {
                    Epsilon::finite(v)
                }
            }
        }
    }
}

impl Serialize for Epsilon {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Epsilon::Finite(e) => serializer.serialize_f64(e),
            Epsilon::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// Calibrated noise scales for one algorithm instance.
///
/// `rho` is the scale for the spectral algorithm; `rho1`/`rho2` are the two
/// output-perturbation scales of the low-space algorithm (both equal `rho` for
/// the spectral one). All scales are zero in non-private mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrivacyParams {
    pub epsilon: Epsilon,
    pub delta: f64,
    pub alpha: f64,
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub sigma_min: f64,
    pub kappa: f64,
    pub non_private: bool,
}

/// An (ε, δ) pair as reported to users.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Budget {
    pub epsilon: Epsilon,
    pub delta: f64,
}

impl Budget {
    /// Total budget of `releases` independent Gaussian releases at this budget,
    /// accounted as `(releases·ε, 2·releases·δ)`.
    pub fn composed(&self, releases: u32) -> Budget {
        Budget {
            epsilon: self.epsilon.scaled(releases as f64),
            delta: 2.0 * releases as f64 * self.delta,
        }
    }
}

impl PrivacyParams {
    pub fn per_release(&self) -> Budget {
        Budget {
            epsilon: self.epsilon,
            delta: self.delta,
        }
    }
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} must lie in (0, 1), got {x}")))
    }
}

fn check_epsilon(epsilon: Epsilon) -> Result<()> {
    match epsilon {
        Epsilon::Finite(e) if !(e.is_finite() && e > 0.0) => {
            Err(Error::arg(format!("epsilon must be positive, got {e}")))
        }
        _ => Ok(()),
    }
}

fn base_scale(epsilon: Epsilon, delta: f64, alpha: f64) -> f64 {
    match epsilon {
        Epsilon::Finite(e) => ((1.0 + alpha) * (1.0 / delta).ln()).sqrt() / e,
        Epsilon::Infinite => 0.0,
    }
}

/// Noise scale for the spectral algorithm: `ρ = √((1+α)·ln(1/δ)) / ε`.
pub fn calibrate_spectral(epsilon: Epsilon, delta: f64, alpha: f64) -> Result<PrivacyParams> {
    check_epsilon(epsilon)?;
    check_unit_interval("delta", delta)?;
    check_unit_interval("alpha", alpha)?;
    let rho = base_scale(epsilon, delta, alpha);
    Ok(PrivacyParams {
        epsilon,
        delta,
        alpha,
        rho,
        rho1: rho,
        rho2: rho,
        sigma_min: 0.0,
        kappa: (1.0 + alpha) / (1.0 - alpha),
        non_private: epsilon.is_infinite(),
    })
}

/// Scales for the low-space algorithm with sketch width `t`:
/// `ρ₁ = √((1+α)·ln(1/δ)) / ε`, `ρ₂ = √(1+α)·ρ₁`, `κ = (1+α)/(1−α)` and
/// `σ_min = 16·ln(1/δ)·√(t·κ·ln(4/δ)) / ε`.
pub fn calibrate_lowspace(epsilon: Epsilon, delta: f64, alpha: f64, t: usize) -> Result<PrivacyParams> {
    check_epsilon(epsilon)?;
    check_unit_interval("delta", delta)?;
    check_unit_interval("alpha", alpha)?;
    if t == 0 {
        return Err(Error::arg("sketch width t must be at least 1"));
    }
    let kappa = (1.0 + alpha) / (1.0 - alpha);
    let rho1 = base_scale(epsilon, delta, alpha);
    let sigma_min = match epsilon {
        Epsilon::Finite(e) => {
            16.0 * (1.0 / delta).ln() * (t as f64 * kappa * (4.0 / delta).ln()).sqrt() / e
        }
        Epsilon::Infinite => 0.0,
    };
    Ok(PrivacyParams {
        epsilon,
        delta,
        alpha,
        rho: rho1,
        rho1,
        rho2: (1.0 + alpha).sqrt() * rho1,
        sigma_min,
        kappa,
        non_private: epsilon.is_infinite(),
    })
}

/// Horizon rounded up to a power of two; must be at least 2.
pub fn padded_horizon(horizon: u64) -> Result<u64> {
    if horizon < 2 {
        return Err(Error::arg(format!("continual horizon must be at least 2, got {horizon}")));
    }
    horizon
        .checked_next_power_of_two()
        .ok_or_else(|| Error::arg("continual horizon too large"))
}

/// Per-node budget of the binary-tree mechanism over `horizon` epochs:
/// `ε' = ε/√(log₂ T)`, `δ' = δ/(2·log₂ T)` with `T` padded to a power of two.
pub fn continual_split(epsilon: Epsilon, delta: f64, horizon: u64) -> Result<(Epsilon, f64)> {
    check_epsilon(epsilon)?;
    check_unit_interval("delta", delta)?;
    let levels = padded_horizon(horizon)?.trailing_zeros() as f64;
    Ok((epsilon.scaled(1.0 / levels.sqrt()), delta / (2.0 * levels)))
}

/// Advanced-composition bound `√(2ℓ·ln(1/δ'))·ε₀ + 2ℓ·ε₀²` for `ℓ` mechanisms
/// that are each ε₀-private.
pub fn advanced_composition(epsilon0: f64, delta_prime: f64, levels: u32) -> f64 {
    let l = levels as f64;
    (2.0 * l * (1.0 / delta_prime).ln()).sqrt() * epsilon0 + 2.0 * l * epsilon0 * epsilon0
}

/// `rows × cols` matrix of i.i.d. `N(0, rho²)` entries, sampled in row-major
/// order from `seed`. `rho = 0` gives the zero matrix.
pub fn noise_matrix(rows: usize, cols: usize, rho: f64, seed: u64) -> DenseMatrix {
    assert!(rho >= 0.0 && rho.is_finite(), "noise scale must be finite and nonnegative");
    if rho == 0.0 {
        return DenseMatrix::zeros(rows, cols);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rho * rng.sample::<f64, _>(StandardNormal))
        .collect();
    DenseMatrix::from_row_slice(rows, cols, &data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_private_has_no_noise() {
        let p = calibrate_spectral(Epsilon::Infinite, 0.01, 0.5).unwrap();
        assert_eq!(p.rho, 0.0);
        assert!(p.non_private);
        let q = calibrate_lowspace(Epsilon::Infinite, 0.01, 0.5, 100).unwrap();
        assert_eq!((q.rho1, q.rho2, q.sigma_min), (0.0, 0.0, 0.0));
    }

    #[test]
    fn spectral_scale_value() {
        let p = calibrate_spectral(Epsilon::Finite(1.0), 0.01, 0.5).unwrap();
        let expect = (1.5 * 100f64.ln()).sqrt();
        assert!((p.rho - expect).abs() < 1e-12);
        assert!((p.rho - 2.6283).abs() < 1e-4);
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(calibrate_spectral(Epsilon::Finite(1.0), 1.0, 0.5).is_err());
        assert!(calibrate_spectral(Epsilon::Finite(1.0), 0.01, 0.0).is_err());
        assert!(calibrate_spectral(Epsilon::Finite(-1.0), 0.01, 0.5).is_err());
        assert!(calibrate_lowspace(Epsilon::Finite(1.0), 0.01, 0.5, 0).is_err());
        assert!(Epsilon::finite(0.0).is_err());
    }

    #[test]
    fn lowspace_scale_values() {
        let p = calibrate_lowspace(Epsilon::Finite(1.0), 0.01, 0.5, 100).unwrap();
        assert!((p.kappa - 3.0).abs() < 1e-15);
        // 16·ln(100)·√(300·ln(400)), evaluated independently.
        let expect = 16.0 * 4.605_170_185_988_092 * (300.0 * 5.991_464_547_107_982_f64).sqrt();
        assert!((p.sigma_min - expect).abs() < 1e-9);
        assert!((p.sigma_min - 3123.87).abs() < 0.01);
        assert!((p.rho2 / p.rho1 - 1.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn split_values() {
        let (e, d) = continual_split(Epsilon::Finite(1.0), 0.01, 16).unwrap();
        assert_eq!(e, Epsilon::Finite(0.5));
        assert_eq!(d, 0.00125);
        let (e, d) = continual_split(Epsilon::Finite(0.7), 0.01, 2).unwrap();
        assert_eq!(e, Epsilon::Finite(0.7));
        assert_eq!(d, 0.005);
        let (e, _) = continual_split(Epsilon::Infinite, 0.01, 8).unwrap();
        assert!(e.is_infinite());
        assert!(continual_split(Epsilon::Finite(1.0), 0.01, 1).is_err());
        // Padded up to 16.
        assert_eq!(continual_split(Epsilon::Finite(1.0), 0.01, 9).unwrap().0, Epsilon::Finite(0.5));
    }

    #[test]
    fn split_fits_advanced_composition() {
        for eps in [0.1, 0.5, 1.0] {
            let mut horizon = 4u64;
            while horizon <= 1024 {
                let (e0, d0) = continual_split(Epsilon::Finite(eps), 0.01, horizon).unwrap();
                let levels = horizon.trailing_zeros();
                let total = advanced_composition(e0.value(), d0, levels);
                let budget = (2.0 * (1.0 / d0).ln()).sqrt() * eps + 2.0 * eps * eps;
                assert!(total <= budget * (1.0 + 1e-12), "T={horizon} eps={eps}");
                horizon *= 2;
            }
        }
    }

    #[test]
    fn scale_is_monotone() {
        let at = |e: f64, d: f64| calibrate_spectral(Epsilon::Finite(e), d, 0.5).unwrap().rho;
        assert!(at(0.5, 0.01) > at(1.0, 0.01));
        assert!(at(1.0, 0.001) > at(1.0, 0.01));
    }

    #[test]
    fn noise_basics() {
        assert!(noise_matrix(3, 4, 0.0, 1).iter().all(|&x| x == 0.0));
        assert_eq!(noise_matrix(3, 4, 2.0, 5), noise_matrix(3, 4, 2.0, 5));
        assert_ne!(noise_matrix(3, 4, 2.0, 5), noise_matrix(3, 4, 2.0, 6));
    }

    #[test]
    fn noise_variance() {
        let rho = 1.7;
        let n = noise_matrix(1000, 100, rho, 9);
        let count = n.len() as f64;
        let mean = n.sum() / count;
        let var = n.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0);
        assert!((var / (rho * rho) - 1.0).abs() < 0.05);
        assert!(mean.abs() < 0.05 * rho);
    }

    #[test]
    fn epsilon_parsing() {
        assert_eq!("inf".parse::<Epsilon>().unwrap(), Epsilon::Infinite);
        assert_eq!("0.5".parse::<Epsilon>().unwrap(), Epsilon::Finite(0.5));
        assert!("-2".parse::<Epsilon>().is_err());
        assert!("x".parse::<Epsilon>().is_err());
        assert_eq!(serde_json::to_string(&Epsilon::Infinite).unwrap(), "\"inf\"");
    }

    #[test]
    fn composed_budgets() {
        let b = Budget { epsilon: Epsilon::Finite(1.0), delta: 0.01 };
        let two = b.composed(2);
        assert_eq!(two.epsilon, Epsilon::Finite(2.0));
        assert!((two.delta - 0.04).abs() < 1e-15);
        let three = b.composed(3);
        assert_eq!(three.epsilon, Epsilon::Finite(3.0));
        assert!((three.delta - 0.06).abs() < 1e-15);
    }
}
