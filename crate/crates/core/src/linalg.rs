//! Dense linear-algebra kernels: SVD with a fixed sign convention,
//! pseudo-inverse, best rank-k truncation, norms, orthonormal bases and the
//! closed-form rank-constrained regression used by every finalize step.
//!
//! All functions are pure. Singular values below `RCOND · σ₁` are treated as
//! zero wherever a pseudo-inverse, projector or basis is formed.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Real dense matrix. Row/column counts are explicit in the type.
pub type DenseMatrix = DMatrix<f64>;

/// Relative threshold below which a singular value counts as zero.
pub const RCOND: f64 = 1e-12;

/// Thin SVD `A = U diag(sigma) Vᵀ` with `sigma` nonincreasing.
///
/// Each column of `u` has its first numerically nonzero entry nonnegative;
/// the matching column of `v` is flipped along with it.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdResult {
    /// Number of singular values above `RCOND · σ₁`.
    pub fn numerical_rank(&self) -> usize {
        numerical_rank_of(&self.sigma, RCOND)
    }

    pub fn numerical_rank_with(&self, rcond: f64) -> usize {
        numerical_rank_of(&self.sigma, rcond)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        scale_columns(&self.u, &self.sigma) * self.v.transpose()
    }

    /// Keeps the leading `r` triplets (or all of them if there are fewer).
    pub fn leading(&self, r: usize) -> SvdResult {
        let r = r.min(self.sigma.len());
        SvdResult {
            u: self.u.columns(0, r).into_owned(),
            sigma: self.sigma[..r].to_vec(),
            v: self.v.columns(0, r).into_owned(),
        }
    }
}

/// Rank-`k` factorization `U_k diag(sigma) V_kᵀ` with orthonormal factors.
///
/// When the sketches only support a smaller rank, the missing columns are
/// orthonormal completions paired with zero singular values and
/// `achieved_rank < k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
    pub achieved_rank: usize,
}

impl Factorization {
    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.achieved_rank < self.k()
    }

    /// `M_k = U_k diag(sigma) V_kᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        scale_columns(&self.u, &self.sigma) * self.v.transpose()
    }

    /// Largest spectral-norm deviation of `UᵀU` or `VᵀV` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.u).max(orthonormality_defect(&self.v))
    }

    /// Factorization of `M_kᵀ`.
    pub fn transposed(self) -> Self {
        Factorization {
            u: self.v,
            sigma: self.sigma,
            v: self.u,
            achieved_rank: self.achieved_rank,
        }
    }

    /// Builds a rank-`k` factorization from up to `k` leading triplets,
    /// completing the bases when fewer are available.
    pub(crate) fn from_partial(u: DenseMatrix, sigma: Vec<f64>, v: DenseMatrix, k: usize) -> Self {
        let achieved_rank = numerical_rank_of(&sigma, RCOND);
        let mut sigma = sigma;
        sigma.truncate(k);
        let q = sigma.len();
        let u = complete_orthonormal(&u.columns(0, q).into_owned(), k);
        let v = complete_orthonormal(&v.columns(0, q).into_owned(), k);
        sigma.resize(k, 0.0);
        Factorization {
            u,
            sigma,
            v,
            achieved_rank: achieved_rank.min(k),
        }
    }
}

pub(crate) fn check_matrix(a: &DenseMatrix, what: &str) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::InvalidInput(format!("{what} has an empty dimension")));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} has non-finite entries")));
    }
    Ok(())
}

fn numerical_rank_of(sigma: &[f64], rcond: f64) -> usize {
    match sigma.first() {
        Some(&s1) if s1 > 0.0 => sigma.iter().take_while(|&&s| s > rcond * s1).count(),
        _ => 0,
    }
}

/// `A · diag(d)` without forming the diagonal matrix.
pub(crate) fn scale_columns(a: &DenseMatrix, d: &[f64]) -> DenseMatrix {
    let mut out = a.columns(0, d.len()).into_owned();
    for (mut col, &s) in out.column_iter_mut().zip(d) {
        col *= s;
    }
    out
}

/// Thin SVD with descending singular values and the column sign convention.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    check_matrix(a, "svd input")?;
    Ok(svd_unchecked(a))
}

fn to_faer(a: &DenseMatrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, f64>) -> DenseMatrix {
    DenseMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

// The decomposition itself comes from faer: nalgebra's bidiagonal SVD can
// return badly wrong factors for exactly rank-deficient inputs.
pub(crate) fn svd_unchecked(a: &DenseMatrix) -> SvdResult {
    let r = a.nrows().min(a.ncols());
    if r == 0 {
        return SvdResult {
            u: DenseMatrix::zeros(a.nrows(), 0),
            sigma: Vec::new(),
            v: DenseMatrix::zeros(a.ncols(), 0),
        };
    }
    let dec = to_faer(a).thin_svd().expect("SVD of a finite matrix converges");
    let raw: Vec<f64> = dec.S().column_vector().iter().copied().collect();
    orient(from_faer(dec.U()), raw, from_faer(dec.V()))
}

/// Sorts the triplets by descending singular value and makes the first
/// significant entry of each `U` column nonnegative.
fn orient(u: DenseMatrix, raw: Vec<f64>, v: DenseMatrix) -> SvdResult {
    let mut order: Vec<usize> = (0..raw.len()).collect();
    // Stable sort keeps the decomposition's order among ties.
    order.sort_by(|&x, &y| raw[y].partial_cmp(&raw[x]).unwrap_or(std::cmp::Ordering::Equal));

    let r = order.len();
    let mut uu = DenseMatrix::zeros(u.nrows(), r);
    let mut vv = DenseMatrix::zeros(v.nrows(), r);
    let mut sigma = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        let ucol = u.column(src);
        let flip = first_significant(ucol.iter().copied()) < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        uu.set_column(dst, &(ucol * sign));
        vv.set_column(dst, &(v.column(src) * sign));
        sigma.push(raw[src].max(0.0));
    }
    SvdResult { u: uu, sigma, v: vv }
}

fn first_significant(col: impl Iterator<Item = f64> + Clone) -> f64 {
    let peak = col.clone().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    col.into_iter().find(|x| x.abs() > 1e-12 * peak).unwrap_or(0.0)
}

/// SVD restricted to the numerically nonzero singular values.
pub(crate) fn trimmed_svd(a: &DenseMatrix) -> SvdResult {
    let full = svd_unchecked(a);
    let r = full.numerical_rank();
    full.leading(r)
}

/// Moore–Penrose pseudo-inverse, inverting singular values above `rcond · σ₁`.
pub fn pinv(a: &DenseMatrix, rcond: f64) -> Result<DenseMatrix> {
    if !(rcond > 0.0 && rcond < 1.0) {
        return Err(Error::arg(format!("rcond must lie in (0, 1), got {rcond}")));
    }
    let dec = svd(a)?;
    let r = numerical_rank_of(&dec.sigma, rcond);
    let inv: Vec<f64> = dec.sigma[..r].iter().map(|s| 1.0 / s).collect();
    Ok(scale_columns(&dec.v, &inv) * dec.u.columns(0, r).transpose())
}

/// Best rank-`k` approximation `[A]_k` (Eckart–Young).
pub fn truncate_rank_k(a: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    let bound = a.nrows().min(a.ncols());
    if k == 0 || k > bound {
        return Err(Error::arg(format!("rank {k} outside [1, {bound}]")));
    }
    let dec = svd(a)?;
    Ok(dec.leading(k).reconstruct())
}

/// `[A]_k` with `k` clamped to the matrix size; zero stays zero.
pub(crate) fn best_rank(a: &DenseMatrix, k: usize) -> DenseMatrix {
    if k >= a.nrows().min(a.ncols()) {
        return a.clone();
    }
    svd_unchecked(a).leading(k).reconstruct()
}

/// Largest singular value.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Singular values in nonincreasing order.
pub(crate) fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s = to_faer(a).singular_values().expect("SVD of a finite matrix converges");
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `σ_{k+1}(A)`, zero when `k ≥ min(rows, cols)`. Uses 0-based `k` as the number
/// of retained directions.
pub fn tail_singular_value(a: &DenseMatrix, k: usize) -> f64 {
    singular_values(a).get(k).copied().unwrap_or(0.0)
}

/// Orthonormal basis of `range(A)` with numerical rank threshold `RCOND · σ₁`.
pub fn orthonormal_column_basis(a: &DenseMatrix) -> Result<DenseMatrix> {
    check_matrix(a, "basis input")?;
    let dec = trimmed_svd(a);
    if dec.sigma.is_empty() {
        return Err(Error::EmptyBasis);
    }
    Ok(dec.u)
}

/// `‖QᵀQ − I‖₂`.
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let gram = q.transpose() * q;
    spectral_norm(&(gram - DenseMatrix::identity(q.ncols(), q.ncols())))
}

/// Extends orthonormal columns `q` (m×r) to `k` orthonormal columns.
pub(crate) fn complete_orthonormal(q: &DenseMatrix, k: usize) -> DenseMatrix {
    let m = q.nrows();
    assert!(k <= m, "cannot fit {k} orthonormal columns in dimension {m}");
    let mut cols: Vec<nalgebra::DVector<f64>> =
        q.column_iter().take(k).map(|c| c.into_owned()).collect();
    let mut candidate = 0;
    while cols.len() < k && candidate < m {
        let mut w = nalgebra::DVector::zeros(m);
        w[candidate] = 1.0;
        candidate += 1;
        // Two Gram–Schmidt passes.
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dot(&w);
                w.axpy(-proj, c, 1.0);
            }
        }
        let norm = w.norm();
        if norm > 1e-6 {
            cols.push(w / norm);
        }
    }
    DenseMatrix::from_columns(&cols)
}

/// Closed-form minimizer of `‖O − L X R‖` over `rank(X) ≤ k`:
/// `X = L† [U_L U_Lᵀ O V_R V_Rᵀ]_k R†`.
///
/// `L` is m×p, `R` is q×n, `O` is m×n and the result is p×q.
pub fn rank_constrained_regression(
    o: &DenseMatrix,
    l: &DenseMatrix,
    r: &DenseMatrix,
    k: usize,
) -> Result<DenseMatrix> {
    check_matrix(o, "O")?;
    check_matrix(l, "L")?;
    check_matrix(r, "R")?;
    if l.nrows() != o.nrows() || r.ncols() != o.ncols() {
        return Err(Error::arg(format!(
            "nonconformal shapes: O {}x{}, L {}x{}, R {}x{}",
            o.nrows(),
            o.ncols(),
            l.nrows(),
            l.ncols(),
            r.nrows(),
            r.ncols()
        )));
    }
    let bound = l.ncols().min(r.nrows());
    if k == 0 || k > bound {
        return Err(Error::arg(format!("rank {k} outside [1, {bound}]")));
    }
    Ok(solve_regression(o, l, Some(r), k))
}

/// Regression kernel shared by the finalize pipelines. `r = None` means `R = I`.
/// Works in the compressed coordinates `U_Lᵀ O V_R` so the projectors are never
/// formed explicitly.
pub(crate) fn solve_regression(
    o: &DenseMatrix,
    l: &DenseMatrix,
    r: Option<&DenseMatrix>,
    k: usize,
) -> DenseMatrix {
    let ls = trimmed_svd(l);
    let inv_l: Vec<f64> = ls.sigma.iter().map(|s| 1.0 / s).collect();
    match r {
        None => {
            if ls.sigma.is_empty() {
                return DenseMatrix::zeros(l.ncols(), o.ncols());
            }
            let core = ls.u.transpose() * o;
            let core = best_rank(&core, k);
            scale_columns(&ls.v, &inv_l) * core
        }
        Some(r) => {
            let rs = trimmed_svd(r);
            if ls.sigma.is_empty() || rs.sigma.is_empty() {
                return DenseMatrix::zeros(l.ncols(), r.nrows());
            }
            let inv_r: Vec<f64> = rs.sigma.iter().map(|s| 1.0 / s).collect();
            let core = ls.u.transpose() * o * &rs.v;
            let core = best_rank(&core, k);
            scale_columns(&ls.v, &inv_l) * core * scale_columns(&rs.u, &inv_r).transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::privacy::noise_matrix;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        noise_matrix(rows, cols, 1.0, seed)
    }

    fn random_orthonormal(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        gaussian(rows, cols, seed).qr().q()
    }

    #[test]
    fn rank_deficient_products_reconstruct() {
        for seed in 0..300u64 {
            let (m, n, r) = (2 + seed as usize % 9, 2 + (seed as usize / 9) % 9, 1 + seed as usize % 3);
            let r = r.min(m).min(n);
            let a = gaussian(m, r, 2 * seed) * gaussian(r, n, 2 * seed + 1);
            let d = svd(&a).unwrap();
            assert!((d.reconstruct() - &a).abs().max() <= 1e-12 * a.abs().max().max(1.0), "seed {seed}");
            assert_eq!(d.numerical_rank_with(1e-10), r, "seed {seed}");
        }
    }

    #[test]
    fn svd_identity() {
        let dec = svd(&DenseMatrix::identity(3, 3)).unwrap();
        assert_eq!(dec.sigma, vec![1.0, 1.0, 1.0]);
        let proj = &dec.u * dec.u.transpose();
        assert!((proj - DenseMatrix::identity(3, 3)).abs().max() < 1e-14);
        assert!((&dec.u - &dec.v).abs().max() < 1e-14);
    }

    #[test]
    fn svd_diagonal() {
        let a = DenseMatrix::from_diagonal(&nalgebra::dvector![2.0, 3.0]);
        let dec = svd(&a).unwrap();
        assert!((dec.sigma[0] - 3.0).abs() < 1e-14);
        assert!((dec.sigma[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn svd_reconstructs_random() {
        let a = gaussian(5, 4, 1);
        let dec = svd(&a).unwrap();
        let resid = frobenius_norm(&(&a - dec.reconstruct()));
        assert!(resid <= 1e-10 * frobenius_norm(&a));
        assert!(orthonormality_defect(&dec.u) < 1e-8);
        assert!(orthonormality_defect(&dec.v) < 1e-8);
        assert!(dec.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_sign_convention() {
        let a = gaussian(6, 3, 2);
        let dec = svd(&a).unwrap();
        for col in dec.u.column_iter() {
            assert!(first_significant(col.iter().copied()) >= 0.0);
        }
        let neg = svd(&(-&a)).unwrap();
        // Same left vectors, flipped right vectors.
        assert!((&dec.u - &neg.u).abs().max() < 1e-10);
        assert!((&dec.v + &neg.v).abs().max() < 1e-10);
    }

    #[test]
    fn svd_rejects_nan() {
        let mut a = DenseMatrix::zeros(2, 2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(svd(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn pinv_zero_singular_value() {
        let a = DenseMatrix::from_diagonal(&nalgebra::dvector![2.0, 0.0]);
        let p = pinv(&a, 1e-12).unwrap();
        let expect = DenseMatrix::from_diagonal(&nalgebra::dvector![0.5, 0.0]);
        assert!((p - expect).abs().max() < 1e-15);
    }

    #[test]
    fn pinv_orthonormal_columns_is_transpose() {
        let q = random_orthonormal(7, 3, 3);
        let p = pinv(&q, 1e-12).unwrap();
        assert!((p - q.transpose()).abs().max() < 1e-12);
    }

    #[test]
    fn pinv_moore_penrose_identities() {
        let a = gaussian(4, 6, 4);
        let p = pinv(&a, 1e-12).unwrap();
        assert!((&a * &p * &a - &a).abs().max() < 1e-8);
        assert!((&p * &a * &p - &p).abs().max() < 1e-8);
        let ap = &a * &p;
        let pa = &p * &a;
        assert!((&ap - ap.transpose()).abs().max() < 1e-8);
        assert!((&pa - pa.transpose()).abs().max() < 1e-8);
    }

    #[test]
    fn pinv_rejects_bad_rcond() {
        assert!(pinv(&DenseMatrix::identity(2, 2), 0.0).is_err());
        assert!(pinv(&DenseMatrix::identity(2, 2), 1.0).is_err());
    }

    #[test]
    fn truncate_diagonal() {
        let a = DenseMatrix::from_diagonal(&nalgebra::dvector![3.0, 2.0, 1.0]);
        let t = truncate_rank_k(&a, 2).unwrap();
        let expect = DenseMatrix::from_diagonal(&nalgebra::dvector![3.0, 2.0, 0.0]);
        assert!((t - expect).abs().max() < 1e-14);
    }

    #[test]
    fn truncate_rank_one_is_identity() {
        let u = gaussian(4, 1, 5);
        let v = gaussian(3, 1, 6);
        let a = &u * v.transpose();
        let t = truncate_rank_k(&a, 1).unwrap();
        assert!((t - &a).abs().max() < 1e-12 * a.abs().max());
    }

    #[test]
    fn truncate_beats_random_competitors() {
        let a = gaussian(6, 6, 7);
        let best = truncate_rank_k(&a, 3).unwrap();
        let err = spectral_norm(&(&a - &best));
        for trial in 0..100 {
            let b = gaussian(6, 3, 100 + trial) * gaussian(3, 6, 200 + trial);
            assert!(err <= spectral_norm(&(&a - b)) + 1e-12);
        }
    }

    #[test]
    fn truncate_rejects_bad_k() {
        let a = DenseMatrix::identity(3, 2);
        assert!(truncate_rank_k(&a, 0).is_err());
        assert!(truncate_rank_k(&a, 3).is_err());
    }

    #[test]
    fn norms_of_small_matrices() {
        let p = DenseMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((spectral_norm(&p) - 1.0).abs() < 1e-14);
        assert!((frobenius_norm(&p) - 2f64.sqrt()).abs() < 1e-14);
        let d = DenseMatrix::from_diagonal(&nalgebra::dvector![3.0, 4.0]);
        assert!((spectral_norm(&d) - 4.0).abs() < 1e-14);
        assert!((frobenius_norm(&d) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn basis_of_rank_one() {
        let a = DenseMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let b = orthonormal_column_basis(&a).unwrap();
        assert_eq!(b.ncols(), 1);
        assert!((b[(0, 0)] - 1.0).abs() < 1e-15 && b[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn basis_projector_invariance() {
        let q = random_orthonormal(8, 3, 8);
        let b = orthonormal_column_basis(&q).unwrap();
        let p1 = &q * q.transpose();
        let p2 = &b * b.transpose();
        assert!((p1 - p2).abs().max() < 1e-12);
    }

    #[test]
    fn basis_residual_full_column_rank() {
        let a = gaussian(8, 3, 9);
        let b = orthonormal_column_basis(&a).unwrap();
        assert_eq!(b.ncols(), 3);
        let resid = frobenius_norm(&(&a - &b * (b.transpose() * &a)));
        assert!(resid <= 1e-10 * frobenius_norm(&a));
    }

    #[test]
    fn basis_of_zero_fails() {
        assert!(matches!(
            orthonormal_column_basis(&DenseMatrix::zeros(3, 2)),
            Err(Error::EmptyBasis)
        ));
    }

    #[test]
    fn regression_identity_sketches_truncate() {
        let o = DenseMatrix::from_diagonal(&nalgebra::dvector![3.0, 1.0]);
        let i2 = DenseMatrix::identity(2, 2);
        let x = rank_constrained_regression(&o, &i2, &i2, 1).unwrap();
        let expect = DenseMatrix::from_diagonal(&nalgebra::dvector![3.0, 0.0]);
        assert!((x - expect).abs().max() < 1e-14);
    }

    #[test]
    fn regression_realizable_case_has_zero_objective() {
        let l = gaussian(6, 3, 10);
        let r = gaussian(4, 7, 11);
        let x0 = gaussian(3, 2, 12) * gaussian(2, 4, 13);
        let o = &l * &x0 * &r;
        let x = rank_constrained_regression(&o, &l, &r, 2).unwrap();
        let obj = spectral_norm(&(&o - &l * &x * &r));
        assert!(obj < 1e-10 * spectral_norm(&o));
    }

    #[test]
    fn regression_beats_random_competitors() {
        let o = gaussian(5, 6, 14);
        let l = gaussian(5, 3, 15);
        let r = gaussian(4, 6, 16);
        let x = rank_constrained_regression(&o, &l, &r, 2).unwrap();
        let best = spectral_norm(&(&o - &l * &x * &r));
        let scale = frobenius_norm(&x);
        for trial in 0..200 {
            let c = gaussian(3, 2, 300 + trial) * gaussian(2, 4, 600 + trial);
            let c = &c * (scale / frobenius_norm(&c));
            assert!(best <= spectral_norm(&(&o - &l * c * &r)) + 1e-9);
        }
    }

    #[test]
    fn regression_output_rank_at_most_k() {
        let o = gaussian(7, 8, 17);
        let l = gaussian(7, 5, 18);
        let r = gaussian(5, 8, 19);
        let x = rank_constrained_regression(&o, &l, &r, 2).unwrap();
        let s = svd(&x).unwrap();
        assert!(s.numerical_rank_with(1e-10) <= 2);
    }

    #[test]
    fn regression_rejects_nonconformal() {
        let o = gaussian(5, 6, 20);
        let l = gaussian(4, 3, 21);
        let r = gaussian(4, 6, 22);
        assert!(rank_constrained_regression(&o, &l, &r, 2).is_err());
        let l = gaussian(5, 3, 23);
        assert!(rank_constrained_regression(&o, &l, &r, 4).is_err());
    }

    #[test]
    fn completion_is_orthonormal() {
        let q = random_orthonormal(6, 2, 24);
        let c = complete_orthonormal(&q, 5);
        assert_eq!(c.ncols(), 5);
        assert!(orthonormality_defect(&c) < 1e-12);
        assert!((c.columns(0, 2) - &q).abs().max() < 1e-15);
        let empty = DenseMatrix::zeros(4, 0);
        assert!(orthonormality_defect(&complete_orthonormal(&empty, 4)) < 1e-15);
    }

    #[test]
    fn partial_factorization_is_padded() {
        let u = random_orthonormal(5, 1, 25);
        let v = random_orthonormal(4, 1, 26);
        let f = Factorization::from_partial(u, vec![2.0], v, 3);
        assert_eq!(f.k(), 3);
        assert_eq!(f.sigma, vec![2.0, 0.0, 0.0]);
        assert_eq!(f.achieved_rank, 1);
        assert!(f.is_rank_deficient());
        assert!(f.orthonormality_defect() < 1e-12);
    }
}
