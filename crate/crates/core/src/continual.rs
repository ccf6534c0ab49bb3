//! Continual release over a binary tree of sketch states.
//!
//! Epoch `τ` stores its update in level `i = tz(τ)` (lowest set bit), folding
//! the exact accumulators of all lower levels into it. Each fold draws one
//! noisy snapshot of the new node. A query at the current epoch sums the noisy
//! snapshots of the occupied levels, which are exactly the binary digits of
//! `τ`, and runs the finalize pipeline without further noise.

use crate::config::LrfConfig;
use crate::error::{Error, Result};
use crate::linalg::Factorization;
use crate::lowspace::{LowSpaceFactorization, LowSpaceSketcher};
use crate::privacy::{calibrate_lowspace, calibrate_spectral, continual_split, padded_horizon, PrivacyParams};
use crate::seed::derive;
use crate::spectral::{SpectralSketcher, TurnstileUpdate};

/// A linear sketch that can be accumulated exactly, released with noise and
/// finalized. Implemented by the spectral and low-space sketchers.
pub trait TreeSketcher {
    /// Noise-free accumulator.
    type Exact: Clone + PartialEq + std::fmt::Debug;
    /// Published (possibly noisy) sketch values.
    type Release: Clone + std::fmt::Debug;
    type Output;

    /// Sketch of the zero matrix.
    fn empty(&self) -> Self::Exact;
    /// Sketch of the data-independent part of the input (zero unless padded).
    fn baseline(&self) -> Result<Self::Exact>;
    fn absorb(&self, acc: &mut Self::Exact, u: &TurnstileUpdate) -> Result<()>;
    fn combine(&self, acc: &mut Self::Exact, other: &Self::Exact) -> Result<()>;
    /// Adds the calibrated noise, drawn from `noise_seed`.
    fn release(&self, acc: &Self::Exact, noise_seed: u64) -> Self::Release;
    /// Converts without noise.
    fn publish(&self, acc: &Self::Exact) -> Self::Release;
    fn add_release(&self, into: &mut Self::Release, part: &Self::Release);
    fn factorize(&self, rel: &Self::Release) -> Result<Self::Output>;
    fn noise_seed(&self) -> u64;
}

#[derive(Clone, Debug)]
struct Node<S: TreeSketcher> {
    exact: S::Exact,
    noisy: S::Release,
    first_epoch: u64,
    last_epoch: u64,
}

/// Occupied tree level and the epochs whose updates it holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelInfo {
    pub level: u32,
    pub first_epoch: u64,
    pub last_epoch: u64,
}

#[derive(Clone, Debug)]
pub struct ContinualState<S: TreeSketcher> {
    sketcher: S,
    requested_horizon: u64,
    horizon: u64,
    tau: u64,
    levels: Vec<Option<Node<S>>>,
    node_params: PrivacyParams,
    snapshots: u64,
}

pub type ContinualSpectral = ContinualState<SpectralSketcher>;
pub type ContinualLowSpace = ContinualState<LowSpaceSketcher>;

impl ContinualState<SpectralSketcher> {
    /// Tree over spectral sketches, each node calibrated at
    /// `ε' = ε/√log₂T`, `δ' = δ/(2·log₂T)`.
    pub fn init_spectral(config: &LrfConfig, horizon: u64) -> Result<Self> {
        let (eps, delta) = continual_split(config.epsilon, config.delta, horizon)?;
        let params = calibrate_spectral(eps, delta, config.alpha)?;
        let sketcher = SpectralSketcher::build(config, params)?;
        Self::with_sketcher(sketcher, params, horizon)
    }
}

impl ContinualState<LowSpaceSketcher> {
    /// Tree over low-space sketches with the same per-node budget split.
    pub fn init_lowspace(config: &LrfConfig, horizon: u64) -> Result<Self> {
        let (eps, delta) = continual_split(config.epsilon, config.delta, horizon)?;
        let sketcher =
            LowSpaceSketcher::build(config, |t| calibrate_lowspace(eps, delta, config.alpha, t))?;
        let params = *sketcher.params();
        Self::with_sketcher(sketcher, params, horizon)
    }
}

impl<S: TreeSketcher> ContinualState<S> {
    fn with_sketcher(sketcher: S, node_params: PrivacyParams, horizon: u64) -> Result<Self> {
        let padded = padded_horizon(horizon)?;
        let levels = padded.trailing_zeros() as usize + 1;
        Ok(ContinualState {
            sketcher,
            requested_horizon: horizon,
            horizon: padded,
            tau: 0,
            levels: (0..levels).map(|_| None).collect(),
            node_params,
            snapshots: 0,
        })
    }

    /// Advances one epoch whose data is a single update.
    pub fn step(&mut self, u: TurnstileUpdate) -> Result<u32> {
        self.step_batch(std::slice::from_ref(&u))
    }

    /// Advances one epoch whose data is the sum of `updates` (possibly none).
    /// Returns the level that received the epoch.
    pub fn step_batch(&mut self, updates: &[TurnstileUpdate]) -> Result<u32> {
        if self.tau >= self.horizon {
            return Err(Error::HorizonExceeded {
                horizon: self.horizon,
            });
        }
        let tau = self.tau + 1;
        let level = tau.trailing_zeros();
        let mut acc = self.sketcher.empty();
        for u in updates {
            self.sketcher.absorb(&mut acc, u)?;
        }
        let mut first_epoch = tau;
        for node in self.levels[..level as usize].iter().flatten() {
            self.sketcher.combine(&mut acc, &node.exact)?;
            first_epoch = first_epoch.min(node.first_epoch);
        }
        let noisy = self.sketcher.release(&acc, self.node_noise_seed(tau, level));
        self.levels[..level as usize].iter_mut().for_each(|n| *n = None);
        self.levels[level as usize] = Some(Node {
            exact: acc,
            noisy,
            first_epoch,
            last_epoch: tau,
        });
        self.tau = tau;
        self.snapshots += 1;
        Ok(level)
    }

    /// Private factorization of the prefix up to `tau`, which must be the
    /// current epoch. Repeated queries return identical output.
    pub fn query(&self, tau: u64) -> Result<S::Output> {
        if tau != self.tau {
            return Err(Error::arg(format!(
                "only the current epoch {} can be queried, got {tau}",
                self.tau
            )));
        }
        let mut sum = self.sketcher.publish(&self.sketcher.baseline()?);
        for node in self.levels.iter().flatten() {
            self.sketcher.add_release(&mut sum, &node.noisy);
        }
        self.sketcher.factorize(&sum)
    }

    /// Noise-free sketch of the current prefix, including the baseline.
    pub fn exact_prefix(&self) -> Result<S::Exact> {
        let mut acc = self.sketcher.baseline()?;
        for node in self.levels.iter().flatten() {
            self.sketcher.combine(&mut acc, &node.exact)?;
        }
        Ok(acc)
    }

    /// Seed of the noise drawn when epoch `tau` fills `level`.
    pub fn node_noise_seed(&self, tau: u64, level: u32) -> u64 {
        derive(derive(self.sketcher.noise_seed(), tau), level as u64)
    }

    pub fn occupied_levels(&self) -> Vec<LevelInfo> {
        self.levels
            .iter()
            .enumerate()
            .filter_map(|(l, n)| {
                n.as_ref().map(|n| LevelInfo {
                    level: l as u32,
                    first_epoch: n.first_epoch,
                    last_epoch: n.last_epoch,
                })
            })
            .collect()
    }

    pub fn epoch(&self) -> u64 {
        self.tau
    }

    /// Horizon rounded up to a power of two.
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn requested_horizon(&self) -> u64 {
        self.requested_horizon
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Per-node calibration.
    pub fn node_params(&self) -> &PrivacyParams {
        &self.node_params
    }

    /// Number of noisy snapshots drawn so far (one per epoch).
    pub fn snapshots_drawn(&self) -> u64 {
        self.snapshots
    }

    pub fn sketcher(&self) -> &S {
        &self.sketcher
    }
}

impl ContinualSpectral {
    pub fn query_current(&self) -> Result<Factorization> {
        self.query(self.tau)
    }
}

impl ContinualLowSpace {
    pub fn query_current(&self) -> Result<LowSpaceFactorization> {
        self.query(self.tau)
    }
}
