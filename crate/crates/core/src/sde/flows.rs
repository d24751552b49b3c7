//! Variational flows along a frozen discrete solution.
//!
//! With `A_k = Df(x_k) h + Σ_j Dσ_j(x_k) Δw_j`, the Euler–Young map has
//! derivative `I + A_k`, so `J_{k+1} = (I + A_k) J_k` is the exact
//! derivative of the discrete solution in `x0`.

use super::solver::{identity, matmul, matvec, Trajectory};
use super::ModelSpec;
use crate::error::{invalid, Error, Result};
use crate::paths::SampledPath;

fn step_matrix(model: &ModelSpec, traj: &Trajectory, k: usize, buf: &mut [f64]) -> Vec<f64> {
    let d = model.dim();
    let dyn_ = model.dynamics();
    let x = traj.state.row(k);
    let h = traj.state.grid().dt();
    let mut a = vec![0.0; d * d];
    dyn_.drift_jacobian(x, &mut a);
    a.iter_mut().for_each(|v| *v *= h);
    for j in 0..d {
        let dw = traj.driver.get(k + 1, j) - traj.driver.get(k, j);
        if dw == 0.0 {
            continue;
        }
        dyn_.diffusion_jacobian(x, j, buf);
        for (ai, bi) in a.iter_mut().zip(buf.iter()) {
            *ai += bi * dw;
        }
    }
    a
}

fn check_finite(m: &[f64], step: usize, t: f64) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { step, time: t })
    }
}

/// `J_t` by Euler–Young stepping of the linearised equation; `J_0 = I`.
pub fn jacobian_flow(model: &ModelSpec, traj: &Trajectory) -> Result<SampledPath> {
    let d = model.dim();
    let g = *traj.state.grid();
    let mut buf = vec![0.0; d * d];
    let mut j = identity(d);
    let mut values = Vec::with_capacity(g.len() * d * d);
    values.extend_from_slice(&j);
    for k in 0..g.len() - 1 {
        let a = step_matrix(model, traj, k, &mut buf);
        let aj = matmul(d, &a, &j);
        for (x, y) in j.iter_mut().zip(aj) {
            *x += y;
        }
        check_finite(&j, k + 1, g.time(k + 1))?;
        values.extend_from_slice(&j);
    }
    SampledPath::new(g, d * d, values)
}

/// `J_t^{-1}` by stepping `J^{-1}_{k+1} = J^{-1}_k (I - A_k)`.
pub fn jacobian_inverse_flow(model: &ModelSpec, traj: &Trajectory) -> Result<SampledPath> {
    let d = model.dim();
    let g = *traj.state.grid();
    let mut buf = vec![0.0; d * d];
    let mut ji = identity(d);
    let mut values = Vec::with_capacity(g.len() * d * d);
    values.extend_from_slice(&ji);
    for k in 0..g.len() - 1 {
        let a = step_matrix(model, traj, k, &mut buf);
        let ja = matmul(d, &ji, &a);
        for (x, y) in ji.iter_mut().zip(ja) {
            *x -= y;
        }
        check_finite(&ji, k + 1, g.time(k + 1))?;
        values.extend_from_slice(&ji);
    }
    SampledPath::new(g, d * d, values)
}

/// Directional derivative of the solution in the driver direction `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDerivative {
    /// Stepped affine equation; the exact derivative of the discrete solution.
    pub path: SampledPath,
    /// `J_t Σ_{s<t} J_{s+}^{-1} σ(x_s) Δv_s` from the two flows.
    pub variation_of_constants: SampledPath,
    /// `max |path - variation_of_constants| / max |path|`.
    pub discrepancy: f64,
}

pub fn noise_derivative(model: &ModelSpec, traj: &Trajectory, v: &SampledPath) -> Result<NoiseDerivative> {
    let d = model.dim();
    traj.state.grid_matches(v)?;
    if v.dim() != d {
        return Err(invalid("direction must have the model dimension"));
    }
    if v.row(0).iter().any(|&x| x != 0.0) {
        return Err(invalid("direction must vanish at the initial time"));
    }
    let g = *traj.state.grid();
    let jac = match &traj.jacobian {
        Some(j) => j.clone(),
        None => jacobian_flow(model, traj)?,
    };
    let jinv = match &traj.jacobian_inv {
        Some(j) => j.clone(),
        None => jacobian_inverse_flow(model, traj)?,
    };
    let dyn_ = model.dynamics();
    let mut buf = vec![0.0; d * d];
    let mut sigma = vec![0.0; d * d];
    let mut kv = vec![0.0; d];
    let mut acc = vec![0.0; d];
    let mut forced = vec![0.0; d];
    let mut tmp = vec![0.0; d];
    let mut stepped = Vec::with_capacity(g.len() * d);
    let mut voc = Vec::with_capacity(g.len() * d);
    stepped.extend_from_slice(&kv);
    voc.extend_from_slice(&kv);
    for k in 0..g.len() - 1 {
        let a = step_matrix(model, traj, k, &mut buf);
        dyn_.diffusion(traj.state.row(k), &mut sigma);
        let dv: Vec<f64> = (0..d).map(|j| v.get(k + 1, j) - v.get(k, j)).collect();
        matvec(d, &sigma, &dv, &mut forced);
        matvec(d, &a, &kv, &mut tmp);
        for i in 0..d {
            kv[i] += tmp[i] + forced[i];
        }
        check_finite(&kv, k + 1, g.time(k + 1))?;
        stepped.extend_from_slice(&kv);

        matvec(d, jinv.row(k + 1), &forced, &mut tmp);
        for i in 0..d {
            acc[i] += tmp[i];
        }
        matvec(d, jac.row(k + 1), &acc, &mut tmp);
        voc.extend_from_slice(&tmp);
    }
    let path = SampledPath::new(g, d, stepped)?;
    let variation_of_constants = SampledPath::new(g, d, voc)?;
    let scale = path.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = path.max_abs_diff(&variation_of_constants);
    let discrepancy = if scale > 0.0 { diff / scale } else { diff };
    Ok(NoiseDerivative { path, variation_of_constants, discrepancy })
}
