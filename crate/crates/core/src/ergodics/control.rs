//! Exact steering of the control system `ẋ = f(x) + σ(x) u̇`.

use serde::{Deserialize, Serialize};

use super::norm;
use crate::error::{invalid, Error, Result};
use crate::paths::{Grid, SampledPath};
use crate::sde::{solve_sde_with, ModelSpec, SolveOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct SteerReport {
    pub desired: SampledPath,
    pub control: SampledPath,
    /// States obtained by solving the SDE with the control as driver.
    pub replay: SampledPath,
    /// `|replay(T) - desired(T)|`.
    pub residual: f64,
}

/// Summary without the paths, for JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteerSummary {
    pub x0: Vec<f64>,
    pub x1: Vec<f64>,
    pub endpoint: Vec<f64>,
    pub residual: f64,
    pub max_control: f64,
}

impl SteerReport {
    pub fn summary(&self) -> SteerSummary {
        SteerSummary {
            x0: self.desired.row(0).to_vec(),
            x1: self.desired.last().to_vec(),
            endpoint: self.replay.last().to_vec(),
            residual: self.residual,
            max_control: self.control.values().iter().fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }
}

/// `x0 + (x1 - x0) S(t/T)` with the cubic smoothstep `S(τ) = 3τ² - 2τ³`.
pub fn smoothstep_path(x0: &[f64], x1: &[f64], horizon: f64, dt: f64) -> Result<SampledPath> {
    if x0.len() != x1.len() {
        return Err(invalid("endpoints have different dimensions"));
    }
    let g = Grid::forward(horizon, dt)?;
    SampledPath::from_fn(g, x0.len(), |t| {
        let tau = (t / horizon).clamp(0.0, 1.0);
        let s = tau * tau * (3.0 - 2.0 * tau);
        x0.iter().zip(x1).map(|(a, b)| a + (b - a) * s).collect()
    })
}

/// Control realising `desired` exactly under the left-point scheme:
/// `Δu_k = σ^{-1}(x_k) (x_{k+1} - x_k - f(x_k) dt)`, then replays the solver.
pub fn steer_along(model: &ModelSpec, desired: &SampledPath) -> Result<SteerReport> {
    let d = model.dim();
    if desired.dim() != d || desired.len() < 2 || desired.grid().t0() != 0.0 {
        return Err(invalid("desired path must start at t = 0, have the model dimension and at least two points"));
    }
    let g = *desired.grid();
    let dt = g.dt();
    let mut u = vec![0.0; g.len() * d];
    for k in 0..g.len() - 1 {
        let x = desired.row(k);
        let inv = model.diffusion_inverse(x).ok_or_else(|| Error::SingularDiffusion(x.to_vec()))?;
        let f = model.drift(x);
        let r: Vec<f64> = (0..d).map(|i| desired.get(k + 1, i) - x[i] - f[i] * dt).collect();
        for i in 0..d {
            let du: f64 = (0..d).map(|j| inv[i * d + j] * r[j]).sum();
            u[(k + 1) * d + i] = u[k * d + i] + du;
        }
    }
    let control = SampledPath::new(g, d, u)?;
    let replay = solve_sde_with(model, desired.row(0), &control, SolveOptions::default())?.state;
    let residual = norm(&replay.last().iter().zip(desired.last()).map(|(a, b)| a - b).collect::<Vec<_>>());
    Ok(SteerReport { desired: desired.clone(), control, replay, residual })
}

/// Steers from `x0` to `x1` over `[0, T]` along the smoothstep interpolant.
pub fn steer_control(model: &ModelSpec, x0: &[f64], x1: &[f64], horizon: f64, dt: f64) -> Result<SteerReport> {
    if x0.len() != model.dim() {
        return Err(invalid("endpoints must have the model dimension"));
    }
    steer_along(model, &smoothstep_path(x0, x1, horizon, dt)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_hits_endpoints() {
        let p = smoothstep_path(&[1.0, 2.0], &[3.0, -1.0], 1.0, 0.01).unwrap();
        assert_eq!(p.row(0), &[1.0, 2.0]);
        assert_eq!(p.last(), &[3.0, -1.0]);
    }

    #[test]
    fn planar_steering_is_exact() {
        let r = steer_control(&ModelSpec::planar(), &[0.2, -0.4], &[-0.5, 0.6], 1.0, 1e-3).unwrap();
        assert!(r.residual < 1e-10);
    }
}
