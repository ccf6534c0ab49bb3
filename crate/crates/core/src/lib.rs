//! Differentially private low-rank factorization of matrices streamed in the
//! turnstile model, with spectral-norm error guarantees.
//!
//! The crate keeps small linear sketches of a matrix that is only ever seen as a
//! stream of `(i, j, s)` increments, and turns them into a rank-`k`
//! factorization `U_k diag(sigma_k) V_kᵀ` once the stream ends (or at every
//! epoch, for continual release).
//!
//! * [`spectral`] keeps `A·Φ` and `S·A` (Gaussian and subsampled Hadamard
//!   sketches) and perturbs both with Gaussian noise.
//! * [`lowspace`] pads the matrix with `σ_min·I`, keeps three two-sided sketches
//!   and only perturbs two of them.
//! * [`continual`] wraps either algorithm in a binary-tree mechanism.
//! * [`harness`] holds the stream format, data generators and evaluation code
//!   used by the `dplrf` binary.
//!
//! Setting the privacy budget to [`Epsilon::Infinite`] turns every algorithm into
//! its non-private counterpart.

pub mod config;
pub mod continual;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod lowspace;
pub mod privacy;
pub mod sketch;
pub mod spectral;

mod accum;
mod seed;

pub use config::LrfConfig;
pub use continual::{ContinualLowSpace, ContinualSpectral, ContinualState, TreeSketcher};
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, Factorization, SvdResult};
pub use lowspace::{LowSpaceFactorization, LowSpaceState, PaddedLayout};
pub use privacy::{Epsilon, PrivacyParams};
pub use sketch::{GaussianSketch, SketchPlan, SrhtSketch};
pub use spectral::{SpectralState, TurnstileUpdate};
