//! Seeded test-matrix generators. Every generated stream comes with the dense
//! matrix it sums to.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::stream::StreamFile;
use crate::linalg::{spectral_norm, DenseMatrix};
use crate::spectral::TurnstileUpdate;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Model {
    /// Product of Gaussian `m×k` and `k×n` factors.
    ExactRank { k: usize },
    /// Rank-`k` signal with singular values in `[scale, 2·scale]` plus a
    /// noise block orthogonal to it whose largest singular value is `tail`.
    LowRankPlusNoise { k: usize, tail: f64, scale: f64 },
    /// I.i.d. entries uniform on `[-1, 1]`.
    Uniform,
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub stream: StreamFile,
    /// Sum of the stream's updates.
    pub dense: DenseMatrix,
}

/// Builds a matrix from `model` and streams it entry by entry in random
/// order. A fraction `churn` of the entries is split into three updates whose
/// extra parts cancel, so the stream exercises deletions.
pub fn gen_stream(m: usize, n: usize, model: Model, seed: u64, churn: f64) -> Result<Generated> {
    if m == 0 || n == 0 {
        return Err(Error::arg("matrix dimensions must be positive"));
    }
    if !(0.0..=1.0).contains(&churn) {
        return Err(Error::arg(format!("churn must lie in [0, 1], got {churn}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = gen_matrix(m, n, model, &mut rng)?;
    let mut updates = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let x = target[(i, j)];
            if rng.random::<f64>() < churn {
                let c: f64 = rng.sample(StandardNormal);
                updates.push(TurnstileUpdate::new(i, j, c));
                updates.push(TurnstileUpdate::new(i, j, -c));
            }
            if x != 0.0 {
                updates.push(TurnstileUpdate::new(i, j, x));
            }
        }
    }
    updates.shuffle(&mut rng);
    let mut stream = StreamFile::new(m, n);
    stream.updates = updates;
    let dense = stream.to_dense()?;
    Ok(Generated { stream, dense })
}

pub fn gen_matrix(m: usize, n: usize, model: Model, rng: &mut ChaCha8Rng) -> Result<DenseMatrix> {
    match model {
        Model::ExactRank { k } => {
            check_rank(k, m, n)?;
            Ok(gaussian(m, k, rng) * gaussian(k, n, rng))
        }
        Model::LowRankPlusNoise { k, tail, scale } => {
            check_rank(k, m, n)?;
            if !(tail >= 0.0 && tail.is_finite() && scale > tail && scale.is_finite()) {
                return Err(Error::arg(format!(
                    "need 0 <= tail < scale, got tail {tail}, scale {scale}"
                )));
            }
            let qu = random_orthonormal(m, k, rng);
            let qv = random_orthonormal(n, k, rng);
            let top: Vec<f64> = (0..k).map(|i| scale * (2.0 - i as f64 / k as f64)).collect();
            let signal = crate::linalg::scale_columns(&qu, &top) * qv.transpose();
            let mut noise = DenseMatrix::zeros(m, n);
            if tail > 0.0 && k < m.min(n) {
                let pu = DenseMatrix::identity(m, m) - &qu * qu.transpose();
                let pv = DenseMatrix::identity(n, n) - &qv * qv.transpose();
                noise = pu * gaussian(m, n, rng) * pv;
                noise *= tail / spectral_norm(&noise);
            }
            Ok(signal + noise)
        }
        Model::Uniform => {
            let dist = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
            Ok(DenseMatrix::from_fn(m, n, |_, _| rng.sample(dist)))
        }
    }
}

fn check_rank(k: usize, m: usize, n: usize) -> Result<()> {
    if k == 0 || k > m.min(n) {
        return Err(Error::arg(format!("rank {k} outside [1, {}]", m.min(n))));
    }
    Ok(())
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn random_orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    gaussian(rows, cols, rng).qr().q()
}
