//! Monte-Carlo diagnostics for the ergodic theory of fBm-driven SDEs.
//!
//! Every estimator is a deterministic function of its inputs and an
//! [`RngSeed`]: ensemble member `i` draws from `seed.substream(i)`, members
//! run in parallel, and results are reduced in index order, so reports are
//! bit-identical for any thread count.

mod bel;
mod control;
mod coupling;
mod feller;
mod lyapunov;
mod stationary;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::RngSeed;
use crate::stats::Welford;

pub use bel::{bel_gradient, bump, BelOptions, BelReport, Cutoff, Observable};
pub use control::{smoothstep_path, steer_along, steer_control, SteerReport};
pub use coupling::{
    meet_measure, smooth_shift_k, subcoupling_build, Ball, GriddedDensity, Reference, SubcouplingOptions,
    SubcouplingReport,
};
pub use feller::{strong_feller_diagnostic, FellerOptions, ObservableTv, StrongFellerReport};
pub use lyapunov::{lyapunov_check, LyapunovOptions, LyapunovReport, LyapunovRow};
pub use stationary::{
    stationary_estimate, uniqueness_diagnostic, ChainOptions, MomentRow, StationaryReport, UniquenessReport,
};

/// Weighted point cloud in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    samples: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

impl EmpiricalMeasure {
    pub fn new(samples: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        let d = samples.first().ok_or_else(|| invalid("empirical measure needs at least one sample"))?.len();
        if samples.iter().any(|s| s.len() != d) {
            return Err(invalid("samples have inconsistent dimensions"));
        }
        if let Some(w) = &weights {
            if w.len() != samples.len() || w.iter().any(|&v| !(v >= 0.0)) {
                return Err(invalid("weights must be nonnegative, one per sample"));
            }
            if (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(invalid("weights must sum to 1"));
            }
        }
        Ok(Self { samples, weights })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// `∫ g dμ`.
    pub fn expect(&self, g: impl Fn(&[f64]) -> f64) -> f64 {
        match &self.weights {
            Some(w) => self.samples.iter().zip(w).map(|(s, w)| w * g(s)).sum(),
            None => self.samples.iter().map(|s| g(s)).sum::<f64>() / self.len() as f64,
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.expect(|x| x[j])).collect()
    }

    /// `∫ |x|^p dμ`.
    pub fn moment(&self, p: f64) -> f64 {
        self.expect(|x| norm(x).powf(p))
    }

    pub fn component(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[j]).collect()
    }
}

/// Monte-Carlo estimate with its standard error and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub estimate: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_samples: usize,
    pub seed: RngSeed,
}

impl McSummary {
    pub fn from_accumulators(acc: &[Welford], seed: RngSeed) -> Self {
        Self {
            estimate: acc.iter().map(Welford::mean).collect(),
            stderr: acc.iter().map(Welford::stderr).collect(),
            n_samples: acc.first().map_or(0, |a| a.count() as usize),
            seed,
        }
    }

    /// Normal-approximation 95% interval for coordinate `i`.
    pub fn ci95(&self, i: usize) -> (f64, f64) {
        let h = 1.96 * self.stderr[i];
        (self.estimate[i] - h, self.estimate[i] + h)
    }
}

/// Past horizon of the stationary windows drawn by the ensemble estimators.
pub const ENSEMBLE_T_PAST: f64 = 16.0;

/// Time step and past horizon of the stationary noise used by the ensemble estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseOptions {
    pub dt: f64,
    pub past_horizon: f64,
}

impl Default for NoiseOptions {
    fn default() -> Self {
        Self { dt: 1.0 / 64.0, past_horizon: ENSEMBLE_T_PAST }
    }
}

/// `C^∞` step from `0` (for `u <= 0`) to `1` (for `u >= 1`).
pub(crate) fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Runs `member(i, seed.substream(i))` for `i < n` in parallel and returns the results in index order.
pub(crate) fn ensemble<T: Send>(n: usize, seed: RngSeed, member: impl Fn(usize, RngSeed) -> T + Sync) -> Vec<T> {
    (0..n).into_par_iter().map(|i| member(i, seed.substream(i as u64))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_measure_validation_and_moments() {
        assert!(EmpiricalMeasure::new(vec![], None).is_err());
        assert!(EmpiricalMeasure::new(vec![vec![1.0], vec![1.0, 2.0]], None).is_err());
        assert!(EmpiricalMeasure::new(vec![vec![1.0], vec![2.0]], Some(vec![0.5, 0.6])).is_err());
        let m = EmpiricalMeasure::new(vec![vec![3.0, 4.0], vec![0.0, 0.0]], Some(vec![0.25, 0.75])).unwrap();
        assert!((m.moment(2.0) - 6.25).abs() < 1e-12);
        assert_eq!(m.mean(), vec![0.75, 1.0]);
    }

    #[test]
    fn ensemble_is_ordered_and_reproducible() {
        let a = ensemble(100, RngSeed::new(9), |i, s| (i, s));
        assert!(a.iter().enumerate().all(|(k, (i, _))| k == *i));
        assert_eq!(a, ensemble(100, RngSeed::new(9), |i, s| (i, s)));
    }
}
