//! The stochastic dynamical system `Λ_t(x, w) = Φ_t(x, R_t w)(t)`.

use super::solver::{solve_endpoint_stepped, solve_sde_with, SolveOptions};
use super::ModelSpec;
use crate::error::{invalid, Result};
use crate::paths::{restrict_shift_r, shift_theta, NoiseWindow};

/// Endpoint of the solution over `[0, t]` driven by the last `t` of the past window.
pub fn sds_lambda(model: &ModelSpec, x: &[f64], w: &NoiseWindow, t: f64) -> Result<Vec<f64>> {
    if x.len() != model.dim() {
        return Err(invalid("initial state has the wrong dimension"));
    }
    if t == 0.0 {
        return Ok(x.to_vec());
    }
    let driver = restrict_shift_r(w, t)?;
    let traj = solve_sde_with(model, x, &driver, SolveOptions::default())?;
    Ok(traj.endpoint().to_vec())
}

/// As [`sds_lambda`] but with solver step `h`, independent of the window grid.
pub fn sds_lambda_stepped(model: &ModelSpec, x: &[f64], w: &NoiseWindow, t: f64, h: f64) -> Result<Vec<f64>> {
    if t == 0.0 {
        return Ok(x.to_vec());
    }
    let driver = restrict_shift_r(w, t)?;
    solve_endpoint_stepped(model, x, &driver, h)
}

/// `|Λ_{s+t}(x, w) - Λ_s(Λ_t(x, θ_s w), w)|`, with solver step `h` (or the window grid).
pub fn cocycle_defect(model: &ModelSpec, x: &[f64], w: &NoiseWindow, s: f64, t: f64, h: Option<f64>) -> Result<f64> {
    let lam = |x: &[f64], w: &NoiseWindow, t: f64| match h {
        Some(h) => sds_lambda_stepped(model, x, w, t, h),
        None => sds_lambda(model, x, w, t),
    };
    let direct = lam(x, w, s + t)?;
    let inner = lam(x, &shift_theta(w, s)?, t)?;
    let composed = lam(&inner, w, s)?;
    Ok(direct.iter().zip(&composed).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}
