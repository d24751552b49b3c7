use rand_chacha::ChaCha8Rng;

use super::{FbmMethod, FbmSample};
use crate::error::{invalid, Error, Result};
use crate::frac::HurstContext;
use crate::paths::{grid_steps_of, Grid, SampledPath};
use crate::quad::tanh_sinh;
use crate::rng::{normals, RngSeed};

/// Moving-average sampler `α_H ∫_{-T_past}^t [(t - u)_+^{H-1/2} - (-u)_+^{H-1/2}] dW(u)`
/// driven by Brownian increments on the grid of `[-T_past, T]`.
#[derive(Debug, Clone)]
pub struct MvnSampler {
    grid: Grid,
    hurst: f64,
    cells: usize,
    weights: Vec<f64>,
    sqrt_dt: f64,
    truncation_variance: f64,
}

/// A truncated-representation sample and the variance the truncation drops at `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MvnSample {
    pub sample: FbmSample,
    pub truncation_variance: f64,
}

impl MvnSampler {
    pub fn new(grid: Grid, past_horizon: f64, ctx: &HurstContext) -> Result<Self> {
        if grid.t0() != 0.0 {
            return Err(invalid("fBm grids must start at t = 0"));
        }
        let horizon = grid.end();
        if past_horizon < 4.0 * horizon {
            return Err(Error::HorizonTooShort { required: 4.0 * horizon, got: past_horizon });
        }
        let dt = grid.dt();
        let past_cells = grid_steps_of(past_horizon, dt)?;
        let cells = past_cells + grid.len() - 1;
        let kappa = ctx.kappa();
        let e = kappa + 1.0;
        let alpha = ctx.alpha();
        // mean of (t - u)_+^kappa over a cell, times alpha
        let cell_mean = |t: f64, a: f64, b: f64| {
            let hi = (t - a).max(0.0).powf(e);
            let lo = (t - b).max(0.0).powf(e);
            (hi - lo) / (e * dt)
        };
        let n = grid.len();
        let mut weights = vec![0.0; n * cells];
        for i in 1..n {
            let t = grid.time(i);
            for k in 0..cells {
                let a = -past_horizon + k as f64 * dt;
                let b = a + dt;
                weights[i * cells + k] = alpha * (cell_mean(t, a, b) - cell_mean(0.0, a, b));
            }
        }
        let truncation_variance = alpha * alpha * dropped_variance(horizon, past_horizon, kappa);
        Ok(Self { grid, hurst: ctx.hurst(), cells, weights, sqrt_dt: dt.sqrt(), truncation_variance })
    }

    pub fn truncation_variance(&self) -> f64 {
        self.truncation_variance
    }

    pub fn sample_scalar(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let dw: Vec<f64> = normals(rng, self.cells).into_iter().map(|z| z * self.sqrt_dt).collect();
        self.weights.chunks_exact(self.cells).map(|row| row.iter().zip(&dw).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn sample_with(&self, dim: usize, rng: &mut ChaCha8Rng) -> Result<MvnSample> {
        let comps: Vec<Vec<f64>> = (0..dim).map(|_| self.sample_scalar(rng)).collect();
        let path = SampledPath::from_components(self.grid, &comps)?;
        Ok(MvnSample {
            sample: FbmSample { path, hurst: self.hurst, method: FbmMethod::MvnTruncated },
            truncation_variance: self.truncation_variance,
        })
    }
}

/// `∫_{T_past}^∞ ((T + r)^k - r^k)^2 dr`, via `r = T_past / v`.
fn dropped_variance(horizon: f64, past: f64, kappa: f64) -> f64 {
    tanh_sinh(0.0, 1.0, 1e-10, |v, _, _| {
        let r = past / v;
        let d = r.powf(kappa) * (kappa * (horizon / r).ln_1p()).exp_m1();
        d * d * past / (v * v)
    })
    .value
}

/// Samples the moving-average representation truncated to `[-T_past, T]`;
/// requires `T_past >= 4 T`.
pub fn sample_mvn_truncated(grid: &Grid, past_horizon: f64, dim: usize, seed: RngSeed, ctx: &HurstContext) -> Result<MvnSample> {
    MvnSampler::new(*grid, past_horizon, ctx)?.sample_with(dim, &mut seed.rng())
}
