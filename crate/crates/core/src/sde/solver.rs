//! Explicit Euler–Young stepping and Young integrals on a grid.

use serde::{Deserialize, Serialize};

use super::ModelSpec;
use crate::error::{invalid, Error, Result};
use crate::paths::SampledPath;

/// Abort threshold on `|x|`.
pub const DIVERGENCE_BOUND: f64 = 1e8;

/// A solution path with optional variational flows.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub state: SampledPath,
    /// `J_t` flattened row-major, `d²` components.
    pub jacobian: Option<SampledPath>,
    pub jacobian_inv: Option<SampledPath>,
    pub driver: SampledPath,
    /// `|x_T - x_T^{(2h)}|` from re-solving on every other grid point.
    pub error_estimate: Option<f64>,
}

impl Trajectory {
    pub fn endpoint(&self) -> &[f64] {
        self.state.last()
    }

    /// Largest `|J_t J_t^{-1} - I|` entry, if both flows are present.
    pub fn inverse_defect(&self) -> Option<f64> {
        let (j, ji) = (self.jacobian.as_ref()?, self.jacobian_inv.as_ref()?);
        let d = self.state.dim();
        let mut worst = 0.0f64;
        for k in 0..j.len() {
            let p = matmul(d, j.row(k), ji.row(k));
            for (idx, v) in p.iter().enumerate() {
                let target = if idx / d == idx % d { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        Some(worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SolveOptions {
    pub jacobian: bool,
    pub inverse: bool,
    pub error_estimate: bool,
}

pub(crate) fn matmul(d: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

pub(crate) fn matvec(d: usize, a: &[f64], x: &[f64], out: &mut [f64]) {
    for i in 0..d {
        out[i] = (0..d).map(|j| a[i * d + j] * x[j]).sum();
    }
}

pub(crate) fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

fn check_driver(model: &ModelSpec, x0: &[f64], driver: &SampledPath) -> Result<()> {
    let d = model.dim();
    if x0.len() != d || driver.dim() != d {
        return Err(invalid(format!(
            "dimension mismatch: model d = {d}, x0 has {}, driver has {}",
            x0.len(),
            driver.dim()
        )));
    }
    if driver.row(0).iter().any(|&v| v != 0.0) {
        return Err(invalid("driver must vanish at its initial time"));
    }
    Ok(())
}

/// Euler–Young steps over arbitrary (possibly non-uniform) step sizes;
/// `incr(k)` gives the driver increment over step `k`.
pub(crate) fn euler_young(
    model: &ModelSpec,
    x0: &[f64],
    steps: &[f64],
    t0: f64,
    incr: impl Fn(usize, &mut [f64]),
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<Vec<f64>> {
    let d = model.dim();
    let dyn_ = model.dynamics();
    let mut x = x0.to_vec();
    let mut f = vec![0.0; d];
    let mut sigma = vec![0.0; d * d];
    let mut dw = vec![0.0; d];
    let mut noise = vec![0.0; d];
    let mut t = t0;
    visit(0, &x);
    for (k, &h) in steps.iter().enumerate() {
        dyn_.drift(&x, &mut f);
        dyn_.diffusion(&x, &mut sigma);
        incr(k, &mut dw);
        matvec(d, &sigma, &dw, &mut noise);
        for i in 0..d {
            x[i] += f[i] * h + noise[i];
        }
        t += h;
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        if !norm2.is_finite() || norm2 > DIVERGENCE_BOUND * DIVERGENCE_BOUND {
            return Err(Error::Divergence { step: k + 1, time: t });
        }
        visit(k + 1, &x);
    }
    Ok(x)
}

fn solve_states(model: &ModelSpec, x0: &[f64], driver: &SampledPath) -> Result<SampledPath> {
    let d = model.dim();
    let g = *driver.grid();
    let steps = vec![g.dt(); g.len() - 1];
    let mut values = Vec::with_capacity(g.len() * d);
    euler_young(
        model,
        x0,
        &steps,
        g.t0(),
        |k, dw| {
            for (j, v) in dw.iter_mut().enumerate() {
                *v = driver.get(k + 1, j) - driver.get(k, j);
            }
        },
        |_, x| values.extend_from_slice(x),
    )?;
    SampledPath::new(g, d, values)
}

/// Solves `dx = f(x) dt + σ(x) dw` by left-point stepping on the driver's grid,
/// with an a-posteriori error estimate from one halving.
pub fn solve_sde(model: &ModelSpec, x0: &[f64], driver: &SampledPath) -> Result<Trajectory> {
    solve_sde_with(model, x0, driver, SolveOptions { error_estimate: true, ..SolveOptions::default() })
}

pub fn solve_sde_with(model: &ModelSpec, x0: &[f64], driver: &SampledPath, opts: SolveOptions) -> Result<Trajectory> {
    check_driver(model, x0, driver)?;
    let state = solve_states(model, x0, driver)?;
    let error_estimate = if opts.error_estimate && driver.len() >= 3 {
        let coarse_driver = driver.subsample(2)?;
        let coarse = solve_states(model, x0, &coarse_driver)?;
        let k = 2 * (coarse.len() - 1);
        let e: f64 = coarse.last().iter().zip(state.row(k)).map(|(a, b)| (a - b) * (a - b)).sum();
        Some(e.sqrt())
    } else {
        None
    };
    let mut traj = Trajectory { state, jacobian: None, jacobian_inv: None, driver: driver.clone(), error_estimate };
    if opts.jacobian {
        traj.jacobian = Some(super::jacobian_flow(model, &traj)?);
    }
    if opts.inverse {
        traj.jacobian_inv = Some(super::jacobian_inverse_flow(model, &traj)?);
    }
    Ok(traj)
}

/// Solves with step `h` on `[0, T]` where `T` is the driver's span; the last
/// step may be shorter and the driver is interpolated linearly between its
/// grid points. Returns the endpoint.
pub fn solve_endpoint_stepped(model: &ModelSpec, x0: &[f64], driver: &SampledPath, h: f64) -> Result<Vec<f64>> {
    check_driver(model, x0, driver)?;
    if !(h > 0.0) {
        return Err(invalid("solver step must be positive"));
    }
    let g = *driver.grid();
    let span = g.span();
    let mut times = vec![0.0];
    let mut k = 1usize;
    while (k as f64) * h < span * (1.0 - 1e-12) {
        times.push(k as f64 * h);
        k += 1;
    }
    times.push(span);
    let d = model.dim();
    let interp: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| {
            let pos = t / g.dt();
            let i = (pos.floor() as usize).min(g.len() - 2);
            let lam = pos - i as f64;
            (0..d).map(|j| driver.get(i, j) * (1.0 - lam) + driver.get(i + 1, j) * lam).collect()
        })
        .collect();
    let steps: Vec<f64> = times.windows(2).map(|p| p[1] - p[0]).collect();
    euler_young(
        model,
        x0,
        &steps,
        g.t0(),
        |k, dw| {
            for (j, v) in dw.iter_mut().enumerate() {
                *v = interp[k + 1][j] - interp[k][j];
            }
        },
        |_, _| {},
    )
}

/// Left-point Riemann–Stieltjes sums with an empirical Young-admissibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct YoungIntegral {
    pub path: SampledPath,
    /// Estimated Hölder exponents of integrand and driver, summed.
    pub exponent_sum: f64,
    pub admissible: bool,
}

/// Hölder exponent estimated from the growth of the root-mean-square increment
/// over the finest dyadic lags `dt, 2 dt, ..., 32 dt` (at most `T/16`).
pub fn holder_exponent_estimate(path: &SampledPath) -> f64 {
    let n = path.len();
    let d = path.dim();
    let mut pts = Vec::new();
    let mut lag = 1;
    while lag <= ((n - 1) / 16).max(1) && lag <= 32 {
        let mut ss = 0.0;
        for k in 0..n - lag {
            ss += (0..d).map(|j| (path.get(k + lag, j) - path.get(k, j)).powi(2)).sum::<f64>();
        }
        let rms = (ss / (n - lag) as f64).sqrt();
        if rms > 0.0 {
            pts.push(((lag as f64 * path.grid().dt()).ln(), rms.ln()));
        }
        lag *= 2;
    }
    if pts.len() < 2 {
        return 1.0;
    }
    let slope = least_squares_slope(&pts);
    slope.clamp(0.0, 1.0)
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// `∫_0^t Y dw` for a matrix-valued `Y` (`d × m`, row-major) and an `m`-dimensional driver.
pub fn young_integral(integrand: &SampledPath, driver: &SampledPath) -> Result<YoungIntegral> {
    integrand.grid_matches(driver)?;
    let m = driver.dim();
    if integrand.dim() % m != 0 {
        return Err(invalid("integrand dimension must be a multiple of the driver dimension"));
    }
    let d = integrand.dim() / m;
    let n = driver.len();
    let mut values = vec![0.0; n * d];
    for k in 0..n - 1 {
        let y = integrand.row(k);
        for i in 0..d {
            let mut acc = values[k * d + i];
            for j in 0..m {
                acc += y[i * m + j] * (driver.get(k + 1, j) - driver.get(k, j));
            }
            values[(k + 1) * d + i] = acc;
        }
    }
    let exponent_sum = holder_exponent_estimate(integrand) + holder_exponent_estimate(driver);
    Ok(YoungIntegral {
        path: SampledPath::new(*driver.grid(), d, values)?,
        exponent_sum,
        admissible: exponent_sum > 1.0,
    })
}
