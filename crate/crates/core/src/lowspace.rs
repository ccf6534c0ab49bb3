//! Low-space private factorization of the padded matrix `Â = (A | σ_min·I_m)`.
//!
//! Three sketches are kept: `Ŷc = Â·Φ̂` (m×t), `Ŷr = Ψ·Â` (t×(m+n)) and
//! `Ẑ = S·Â·T` (v×v), where `Φ̂ = Φ·Ω/√t`, `Ψ` is Gaussian, `S` is a scaled
//! SRHT on the row space and `T` is the transpose of a scaled SRHT on the
//! padded column space. Finalizing adds noise to `Ŷr` and `Ẑ`, takes
//! orthonormal bases `U` of `Ŷc` and `V` of `Ŷrᵀ`, and solves the two-sided
//! regression `min ‖(S U) X (Tᵀ V)ᵀ − Ẑ‖` at rank `k`.
//!
//! Updates cost `O(t + v²)` because `Ẑ` receives a dense outer product.

use log::warn;

use crate::accum::ExactMatrix;
use crate::config::{LrfConfig, Orientation};
use crate::continual::TreeSketcher;
use crate::error::{Error, Result};
use crate::linalg::{
    orthonormal_column_basis, scale_columns, solve_regression, spectral_norm, svd_unchecked,
    DenseMatrix, Factorization,
};
use crate::privacy::{calibrate_lowspace, noise_matrix, PrivacyParams};
use crate::seed::{derive, tag};
use crate::sketch::{GaussianSketch, SketchPlan, SrhtSketch};
use crate::spectral::TurnstileUpdate;

/// Where the padding block sits relative to `A` in external coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PaddedLayout {
    /// `(A | σ·I_m)`: `V` has `m + n` rows.
    Columns,
    /// `[A ; σ·I_n]`, used when the algorithm ran on `Aᵀ`: `U` has `m + n` rows.
    Rows,
}

/// Output of the low-space algorithm: a rank-`k` factorization of the padded
/// matrix plus what is needed to compare it with `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowSpaceFactorization {
    pub padded: Factorization,
    pub layout: PaddedLayout,
    pub rows: usize,
    pub cols: usize,
    pub sigma_min: f64,
}

impl LowSpaceFactorization {
    /// `(A | 0)` or `[A ; 0]`, the matrix the padded output approximates.
    pub fn zero_padded(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        self.check(a)?;
        Ok(match self.layout {
            PaddedLayout::Columns => {
                let mut out = DenseMatrix::zeros(self.rows, self.rows + self.cols);
                out.columns_mut(0, self.cols).copy_from(a);
                out
            }
            PaddedLayout::Rows => {
                let mut out = DenseMatrix::zeros(self.rows + self.cols, self.cols);
                out.rows_mut(0, self.rows).copy_from(a);
                out
            }
        })
    }

    /// `(A | σ_min·I)` or `[A ; σ_min·I]`.
    pub fn padded_target(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        let mut out = self.zero_padded(a)?;
        match self.layout {
            PaddedLayout::Columns => {
                for i in 0..self.rows {
                    out[(i, self.cols + i)] = self.sigma_min;
                }
            }
            PaddedLayout::Rows => {
                for j in 0..self.cols {
                    out[(self.rows + j, j)] = self.sigma_min;
                }
            }
        }
        Ok(out)
    }

    /// `‖(A | 0) − M_k‖₂`.
    pub fn padded_error(&self, a: &DenseMatrix) -> Result<f64> {
        Ok(spectral_norm(&(self.zero_padded(a)? - self.padded.reconstruct())))
    }

    /// The `m×n` block of `M_k` that approximates `A`.
    pub fn restricted_block(&self) -> DenseMatrix {
        let full = self.padded.reconstruct();
        full.view((0, 0), (self.rows, self.cols)).into_owned()
    }

    /// `‖A − M_k[:m, :n]‖₂`.
    pub fn restricted_error(&self, a: &DenseMatrix) -> Result<f64> {
        self.check(a)?;
        Ok(spectral_norm(&(a - self.restricted_block())))
    }

    /// Rank-`k` factorization of the `m×n` block, obtained by dropping the
    /// padding coordinates and re-orthonormalizing. Pure post-processing.
    pub fn restricted(&self) -> Factorization {
        let f = &self.padded;
        let k = f.k();
        match self.layout {
            PaddedLayout::Columns => {
                let vn = f.v.rows(0, self.cols).into_owned();
                let core = svd_unchecked(&(scale_columns(&vn, &f.sigma)).transpose());
                Factorization::from_partial(&f.u * core.u, core.sigma, core.v, k)
            }
            PaddedLayout::Rows => {
                let um = f.u.rows(0, self.rows).into_owned();
                let core = svd_unchecked(&scale_columns(&um, &f.sigma));
                Factorization::from_partial(core.u, core.sigma, &f.v * core.v, k)
            }
        }
    }

    fn check(&self, a: &DenseMatrix) -> Result<()> {
        if a.shape() != (self.rows, self.cols) {
            return Err(Error::arg(format!(
                "matrix is {}x{}, factorization expects {}x{}",
                a.nrows(),
                a.ncols(),
                self.rows,
                self.cols
            )));
        }
        Ok(())
    }
}

/// Frozen sketch matrices and calibration of one low-space instance.
#[derive(Clone, Debug)]
pub struct LowSpaceSketcher {
    orientation: Orientation,
    k: usize,
    seed: u64,
    plan: SketchPlan,
    params: PrivacyParams,
    phi_hat: DenseMatrix,
    psi: GaussianSketch,
    psi_dense: DenseMatrix,
    s: SrhtSketch,
    t: SrhtSketch,
    noise_seed: u64,
}

/// Exact accumulators `(Ŷc, Ŷr, Ẑ)` in internal orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct LowSpaceSketches {
    yc: ExactMatrix,
    yr: ExactMatrix,
    z: ExactMatrix,
}

impl LowSpaceSketches {
    pub fn yc(&self) -> DenseMatrix {
        self.yc.to_dense()
    }

    pub fn yr(&self) -> DenseMatrix {
        self.yr.to_dense()
    }

    pub fn z(&self) -> DenseMatrix {
        self.z.to_dense()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowSpaceRelease {
    pub yc: DenseMatrix,
    pub yr: DenseMatrix,
    pub z: DenseMatrix,
}

impl LowSpaceSketcher {
    /// Builds the sketches; `calibrate` maps the final sketch width `t` to the
    /// noise parameters.
    pub(crate) fn build(
        config: &LrfConfig,
        calibrate: impl FnOnce(usize) -> Result<PrivacyParams>,
    ) -> Result<Self> {
        config.validate()?;
        let transposed = config.m > config.n;
        if transposed {
            warn!(
                "matrix is {}x{} (more rows than columns); sketching its transpose",
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
        let params = calibrate(plan.t)?;
        let t = plan.t;
        let phi = GaussianSketch::new(m + n, m, 1.0 / t as f64, derive(config.seed, tag::PHI))?;
        let omega = GaussianSketch::new(m, t, 1.0, derive(config.seed, tag::OMEGA))?;
        let phi_hat = phi.materialize() * omega.materialize() / (t as f64).sqrt();
        let psi = GaussianSketch::new(t, m, 1.0 / t as f64, derive(config.seed, tag::PSI))?;
        let s = SrhtSketch::new(
            plan.v,
            m,
            derive(config.seed, tag::SRHT_S_SIGNS),
            derive(config.seed, tag::SRHT_S_PERM),
            true,
        )?;
        let t_srht = SrhtSketch::new(
            plan.v,
            m + n,
            derive(config.seed, tag::SRHT_T_SIGNS),
            derive(config.seed, tag::SRHT_T_PERM),
            true,
        )?;
        Ok(LowSpaceSketcher {
            orientation,
            k: config.k,
            seed: config.seed,
            plan,
            params,
            phi_hat,
            psi_dense: psi.materialize(),
            psi,
            s,
            t: t_srht,
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

    /// `Φ̂`, (m+n)×t in internal orientation.
    pub fn phi_hat(&self) -> &DenseMatrix {
        &self.phi_hat
    }

    pub fn psi(&self) -> &GaussianSketch {
        &self.psi
    }

    pub fn s(&self) -> &SrhtSketch {
        &self.s
    }

    /// The SRHT whose transpose is `T`.
    pub fn t_transpose(&self) -> &SrhtSketch {
        &self.t
    }

    fn same_configuration(&self, other: &Self) -> bool {
        self.orientation == other.orientation
            && self.k == other.k
            && self.seed == other.seed
            && self.plan == other.plan
            && self.params == other.params
    }

    fn wrap(&self, f: Factorization) -> LowSpaceFactorization {
        let (f, layout) = if self.orientation.transposed {
            (f.transposed(), PaddedLayout::Rows)
        } else {
            (f, PaddedLayout::Columns)
        };
        LowSpaceFactorization {
            padded: f,
            layout,
            rows: self.orientation.rows,
            cols: self.orientation.cols,
            sigma_min: self.params.sigma_min,
        }
    }
}

impl TreeSketcher for LowSpaceSketcher {
    type Exact = LowSpaceSketches;
    type Release = LowSpaceRelease;
    type Output = LowSpaceFactorization;

    fn empty(&self) -> LowSpaceSketches {
        let (m, n) = self.orientation.internal();
        LowSpaceSketches {
            yc: ExactMatrix::zeros(m, self.plan.t),
            yr: ExactMatrix::zeros(self.plan.t, m + n),
            z: ExactMatrix::zeros(self.plan.v, self.plan.v),
        }
    }

    /// Sketches of `(0 | σ_min·I_m)`.
    fn baseline(&self) -> Result<LowSpaceSketches> {
        let sigma = self.params.sigma_min;
        if sigma == 0.0 {
            return Ok(self.empty());
        }
        let (m, n) = self.orientation.internal();
        let yc = self.phi_hat.rows(n, m) * sigma;
        let mut yr = DenseMatrix::zeros(self.plan.t, m + n);
        yr.columns_mut(n, m).copy_from(&(&self.psi_dense * sigma));
        // S·(0 | σI)·T = σ·S·(columns n.. of the T-side SRHT)ᵀ
        let t_block = self.t.materialize().columns(n, m).into_owned();
        let z = self.s.materialize() * t_block.transpose() * sigma;
        Ok(LowSpaceSketches {
            yc: ExactMatrix::from_dense(&yc)?,
            yr: ExactMatrix::from_dense(&yr)?,
            z: ExactMatrix::from_dense(&z)?,
        })
    }

    fn absorb(&self, acc: &mut LowSpaceSketches, u: &TurnstileUpdate) -> Result<()> {
        let (i, j, s) = self.orientation.map(u)?;
        let phi_row: Vec<f64> = self.phi_hat.row(j).iter().copied().collect();
        let psi_col: Vec<f64> = self.psi_dense.column(i).iter().copied().collect();
        let s_col = self.s.column(i)?;
        let t_col = self.t.column(j)?;
        let mut next = acc.clone();
        next.yc.add_row_scaled(i, s, &phi_row)?;
        next.yr.add_col_scaled(j, s, &psi_col)?;
        next.z.add_outer_scaled(s, &s_col, &t_col)?;
        *acc = next;
        Ok(())
    }

    fn combine(&self, acc: &mut LowSpaceSketches, other: &LowSpaceSketches) -> Result<()> {
        let mut next = acc.clone();
        next.yc.add_assign(&other.yc)?;
        next.yr.add_assign(&other.yr)?;
        next.z.add_assign(&other.z)?;
        *acc = next;
        Ok(())
    }

    fn release(&self, acc: &LowSpaceSketches, noise_seed: u64) -> LowSpaceRelease {
        let mut rel = self.publish(acc);
        let (r1, r2) = (self.params.rho1, self.params.rho2);
        rel.yr += noise_matrix(rel.yr.nrows(), rel.yr.ncols(), r1, derive(noise_seed, tag::NOISE_FIRST));
        rel.z += noise_matrix(rel.z.nrows(), rel.z.ncols(), r2, derive(noise_seed, tag::NOISE_SECOND));
        rel
    }

    fn publish(&self, acc: &LowSpaceSketches) -> LowSpaceRelease {
        LowSpaceRelease {
            yc: acc.yc.to_dense(),
            yr: acc.yr.to_dense(),
            z: acc.z.to_dense(),
        }
    }

    fn add_release(&self, into: &mut LowSpaceRelease, part: &LowSpaceRelease) {
        into.yc += &part.yc;
        into.yr += &part.yr;
        into.z += &part.z;
    }

    fn factorize(&self, rel: &LowSpaceRelease) -> Result<LowSpaceFactorization> {
        let u = orthonormal_column_basis(&rel.yc)?;
        let v = orthonormal_column_basis(&rel.yr.transpose())?;
        let l = self.s.apply(&u)?;
        let r = self.t.apply(&v)?.transpose();
        let w = solve_regression(&rel.z, &l, Some(&r), self.k);
        let top = svd_unchecked(&w).leading(self.k);
        let f = Factorization::from_partial(&u * &top.u, top.sigma, &v * &top.v, self.k);
        Ok(self.wrap(f))
    }

    fn noise_seed(&self) -> u64 {
        self.noise_seed
    }
}

/// Streaming state of the low-space algorithm.
#[derive(Clone, Debug)]
pub struct LowSpaceState {
    sketcher: LowSpaceSketcher,
    sketches: LowSpaceSketches,
    updates: u64,
}

impl LowSpaceState {
    /// Sketches of the padding block, noise scales `ρ₁`, `ρ₂ = √(1+α)·ρ₁` and
    /// padding `σ_min` calibrated for the planned `t`.
    pub fn init(config: &LrfConfig) -> Result<Self> {
        let sketcher = LowSpaceSketcher::build(config, |t| {
            calibrate_lowspace(config.epsilon, config.delta, config.alpha, t)
        })?;
        let sketches = sketcher.baseline()?;
        Ok(LowSpaceState {
            sketcher,
            sketches,
            updates: 0,
        })
    }

    /// Applies one update in `O(t + v²)`. Rejected updates leave the state untouched.
    pub fn update(&mut self, u: TurnstileUpdate) -> Result<()> {
        self.sketcher.absorb(&mut self.sketches, &u)?;
        self.updates += 1;
        Ok(())
    }

    pub fn update_all<I: IntoIterator<Item = TurnstileUpdate>>(&mut self, updates: I) -> Result<()> {
        updates.into_iter().try_for_each(|u| self.update(u))
    }

    /// Adds another shard's data. Both shards carry the padding image, so one
    /// copy is subtracted.
    pub fn merge_from(&mut self, other: &LowSpaceState) -> Result<()> {
        if !self.sketcher.same_configuration(&other.sketcher) {
            return Err(Error::ConfigMismatch(
                "low-space states differ in dimensions, plan, calibration or seed".into(),
            ));
        }
        let base = self.sketcher.baseline()?;
        let mut next = self.sketches.clone();
        self.sketcher.combine(&mut next, &other.sketches)?;
        let neg = LowSpaceSketches {
            yc: base.yc.negated(),
            yr: base.yr.negated(),
            z: base.z.negated(),
        };
        self.sketcher.combine(&mut next, &neg)?;
        self.sketches = next;
        self.updates += other.updates;
        Ok(())
    }

    pub fn merge(&self, other: &LowSpaceState) -> Result<LowSpaceState> {
        let mut out = self.clone();
        out.merge_from(other)?;
        Ok(out)
    }

    pub fn finalize(&self) -> Result<LowSpaceFactorization> {
        self.finalize_with_noise_seed(self.sketcher.noise_seed)
    }

    pub fn finalize_with_noise_seed(&self, noise_seed: u64) -> Result<LowSpaceFactorization> {
        let rel = self.sketcher.release(&self.sketches, noise_seed);
        self.sketcher.factorize(&rel)
    }

    pub fn sketcher(&self) -> &LowSpaceSketcher {
        &self.sketcher
    }

    pub fn sketches(&self) -> &LowSpaceSketches {
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

    pub fn updates_applied(&self) -> u64 {
        self.updates
    }
}
