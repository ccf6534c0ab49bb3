//! Neighboring inputs under the two privacy granularities: a perturbation of
//! unit Frobenius norm, or a unit rank-one perturbation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::DenseMatrix;

fn unit_gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    loop {
        let g = DenseMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = g.norm();
        if norm > 0.0 {
            return g / norm;
        }
    }
}

/// Random `E` with `‖E‖_F = 1`.
pub fn priv1_difference(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    unit_gaussian(rows, cols, &mut rng)
}

/// Random `u·vᵀ` with unit `u` and `v`.
pub fn priv2_difference(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = unit_gaussian(rows, 1, &mut rng);
    let v = unit_gaussian(cols, 1, &mut rng);
    u * v.transpose()
}

pub fn neighbor_priv1(a: &DenseMatrix, seed: u64) -> DenseMatrix {
    a + priv1_difference(a.nrows(), a.ncols(), seed)
}

pub fn neighbor_priv2(a: &DenseMatrix, seed: u64) -> DenseMatrix {
    a + priv2_difference(a.nrows(), a.ncols(), seed)
}
