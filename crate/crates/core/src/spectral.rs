//! Spectral-norm private factorization from two linear sketches.
//!
//! The state keeps `Ŷ = A·Φ` (Gaussian `Φ`, n×t) and `Ẑ = S·A` (scaled SRHT
//! `S`, v×m). Finalizing perturbs both with `N(0, ρ²)` noise, takes an
//! orthonormal basis `U` of `Ŷ + N₁`, solves the sketched rank-`k` regression
//! `min ‖S U X − (Ẑ + N₂)‖` and factors `U·X`.
//!
//! `Φ` and `S` are public randomness; the noise is drawn from a separate seed
//! at finalize time. Matrices with more columns than rows are handled by
//! sketching the transpose.

use log::warn;
use serde::Serialize;

use crate::accum::ExactMatrix;
use crate::config::{LrfConfig, Orientation};
use crate::continual::TreeSketcher;
use crate::error::{Error, Result};
use crate::linalg::{
    orthonormal_column_basis, solve_regression, svd_unchecked, DenseMatrix, Factorization,
};
use crate::privacy::{calibrate_spectral, noise_matrix, PrivacyParams};
use crate::seed::{derive, tag};
use crate::sketch::{GaussianSketch, SketchPlan, SrhtSketch};

/// One turnstile increment: `A[i, j] += s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TurnstileUpdate {
    pub i: usize,
    pub j: usize,
    pub s: f64,
}

impl TurnstileUpdate {
    pub fn new(i: usize, j: usize, s: f64) -> Self {
        TurnstileUpdate { i, j, s }
    }
}

/// Frozen sketch matrices and calibration of one spectral instance.
#[derive(Clone, Debug)]
pub struct SpectralSketcher {
    orientation: Orientation,
    k: usize,
    plan: SketchPlan,
    params: PrivacyParams,
    phi: GaussianSketch,
    phi_dense: DenseMatrix,
    srht: SrhtSketch,
    noise_seed: u64,
}

/// Exact accumulators `(Ŷ, Ẑ)` in internal orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSketches {
    yhat: ExactMatrix,
    zhat: ExactMatrix,
}

impl SpectralSketches {
    pub fn yhat(&self) -> DenseMatrix {
        self.yhat.to_dense()
    }

    pub fn zhat(&self) -> DenseMatrix {
        self.zhat.to_dense()
    }
}

/// Released (possibly noisy) sketches `(Y, Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralRelease {
    pub y: DenseMatrix,
    pub z: DenseMatrix,
}

impl SpectralSketcher {
    pub(crate) fn build(config: &LrfConfig, params: PrivacyParams) -> Result<Self> {
        config.validate()?;
        let transposed = config.m < config.n;
        if transposed {
            warn!(
                "matrix is {}x{} (fewer rows than columns); sketching its transpose",
                config.m, config.n
            );
        }
        let orientation = Orientation {
            rows: config.m,
            cols: config.n,
            transposed,
        };
        let (m, n) = orientation.internal();
        let plan = config.plan(m.next_power_of_two())?;
        let phi = GaussianSketch::new(n, plan.t, 1.0 / plan.t as f64, derive(config.seed, tag::PHI))?;
        let srht = SrhtSketch::new(
            plan.v,
            m,
            derive(config.seed, tag::SRHT_S_SIGNS),
            derive(config.seed, tag::SRHT_S_PERM),
            true,
        )?;
        Ok(SpectralSketcher {
            orientation,
            k: config.k,
            plan,
            params,
            phi_dense: phi.materialize(),
            phi,
            srht,
            noise_seed: derive(config.seed, tag::NOISE),
        })
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn plan(&self) -> &SketchPlan {
        &self.plan
    }

    pub fn params(&self) -> &PrivacyParams {
        &self.params
    }

    /// The published Gaussian sketch `Φ` (n×t, internal orientation).
    pub fn phi(&self) -> &GaussianSketch {
        &self.phi
    }

    /// The published SRHT `S` (v×m, internal orientation).
    pub fn srht(&self) -> &SrhtSketch {
        &self.srht
    }

    fn same_configuration(&self, other: &Self) -> bool {
        self.orientation == other.orientation
            && self.k == other.k
            && self.plan == other.plan
            && self.params == other.params
            && self.phi == other.phi
            && self.srht.seeds() == other.srht.seeds()
            && self.noise_seed == other.noise_seed
    }
}

impl TreeSketcher for SpectralSketcher {
    type Exact = SpectralSketches;
    type Release = SpectralRelease;
    type Output = Factorization;

    fn empty(&self) -> SpectralSketches {
        let (m, n) = self.orientation.internal();
        SpectralSketches {
            yhat: ExactMatrix::zeros(m, self.plan.t),
            zhat: ExactMatrix::zeros(self.plan.v, n),
        }
    }

    fn baseline(&self) -> Result<SpectralSketches> {
        Ok(self.empty())
    }

    /// Row `i` of `Ŷ` gains `s·Φ[j, :]`; column `j` of `Ẑ` gains `s·S[:, i]`.
    fn absorb(&self, acc: &mut SpectralSketches, u: &TurnstileUpdate) -> Result<()> {
        let (i, j, s) = self.orientation.map(u)?;
        let s_col = self.srht.column(i)?;
        let phi_row: Vec<f64> = self.phi_dense.row(j).iter().copied().collect();
        // Both increments are validated before either is applied.
        let mut y = acc.yhat.clone();
        y.add_row_scaled(i, s, &phi_row)?;
        acc.zhat.add_col_scaled(j, s, &s_col)?;
        acc.yhat = y;
        Ok(())
    }

    fn combine(&self, acc: &mut SpectralSketches, other: &SpectralSketches) -> Result<()> {
        let mut y = acc.yhat.clone();
        y.add_assign(&other.yhat)?;
        acc.zhat.add_assign(&other.zhat)?;
        acc.yhat = y;
        Ok(())
    }

    fn release(&self, acc: &SpectralSketches, noise_seed: u64) -> SpectralRelease {
        let rho = self.params.rho;
        let mut y = acc.yhat.to_dense();
        let mut z = acc.zhat.to_dense();
        y += noise_matrix(y.nrows(), y.ncols(), rho, derive(noise_seed, tag::NOISE_FIRST));
        z += noise_matrix(z.nrows(), z.ncols(), rho, derive(noise_seed, tag::NOISE_SECOND));
        SpectralRelease { y, z }
    }

    fn publish(&self, acc: &SpectralSketches) -> SpectralRelease {
        SpectralRelease {
            y: acc.yhat.to_dense(),
            z: acc.zhat.to_dense(),
        }
    }

    fn add_release(&self, into: &mut SpectralRelease, part: &SpectralRelease) {
        into.y += &part.y;
        into.z += &part.z;
    }

    fn factorize(&self, rel: &SpectralRelease) -> Result<Factorization> {
        let u = orthonormal_column_basis(&rel.y)?;
        let su = self.srht.apply(&u)?;
        let x = solve_regression(&rel.z, &su, None, self.k);
        let top = svd_unchecked(&x).leading(self.k);
        let f = Factorization::from_partial(&u * &top.u, top.sigma, top.v, self.k);
        Ok(if self.orientation.transposed {
            f.transposed()
        } else {
            f
        })
    }

    fn noise_seed(&self) -> u64 {
        self.noise_seed
    }
}

/// Streaming state of the spectral algorithm.
#[derive(Clone, Debug)]
pub struct SpectralState {
    sketcher: SpectralSketcher,
    sketches: SpectralSketches,
    updates: u64,
}

impl SpectralState {
    /// Zero sketches, noise scale `ρ = √((1+α)·ln(1/δ))/ε`, sketches drawn from
    /// `config.seed`.
    pub fn init(config: &LrfConfig) -> Result<Self> {
        let params = calibrate_spectral(config.epsilon, config.delta, config.alpha)?;
        Self::with_params(config, params)
    }

    /// Same as [`SpectralState::init`] with externally calibrated noise.
    pub fn with_params(config: &LrfConfig, params: PrivacyParams) -> Result<Self> {
        let sketcher = SpectralSketcher::build(config, params)?;
        let sketches = sketcher.baseline()?;
        Ok(SpectralState {
            sketcher,
            sketches,
            updates: 0,
        })
    }

    /// Applies one update in `O(t + v)`. Rejected updates leave the state untouched.
    pub fn update(&mut self, u: TurnstileUpdate) -> Result<()> {
        self.sketcher.absorb(&mut self.sketches, &u)?;
        self.updates += 1;
        Ok(())
    }

    pub fn update_all<I: IntoIterator<Item = TurnstileUpdate>>(&mut self, updates: I) -> Result<()> {
        updates.into_iter().try_for_each(|u| self.update(u))
    }

    /// Adds another shard's sketches into this one.
    pub fn merge_from(&mut self, other: &SpectralState) -> Result<()> {
        if !self.sketcher.same_configuration(&other.sketcher) {
            return Err(Error::ConfigMismatch(
                "spectral states differ in dimensions, plan, calibration or seeds".into(),
            ));
        }
        self.sketcher.combine(&mut self.sketches, &other.sketches)?;
        self.updates += other.updates;
        Ok(())
    }

    pub fn merge(&self, other: &SpectralState) -> Result<SpectralState> {
        let mut out = self.clone();
        out.merge_from(other)?;
        Ok(out)
    }

    /// Private rank-`k` factorization of everything streamed so far. Does not
    /// consume or modify the state.
    pub fn finalize(&self) -> Result<Factorization> {
        self.finalize_with_noise_seed(self.sketcher.noise_seed)
    }

    /// Finalize with the private noise drawn from `noise_seed`.
    pub fn finalize_with_noise_seed(&self, noise_seed: u64) -> Result<Factorization> {
        let rel = self.sketcher.release(&self.sketches, noise_seed);
        self.sketcher.factorize(&rel)
    }

    pub fn sketcher(&self) -> &SpectralSketcher {
        &self.sketcher
    }

    pub fn sketches(&self) -> &SpectralSketches {
        &self.sketches
    }

    pub fn plan(&self) -> &SketchPlan {
        &self.sketcher.plan
    }

    pub fn params(&self) -> &PrivacyParams {
        &self.sketcher.params
    }

    pub fn orientation(&self) -> Orientation {
        self.sketcher.orientation
    }

    /// Number of updates absorbed, including merged shards.
    pub fn updates_applied(&self) -> u64 {
        self.updates
    }
}
