//! Moment contraction `E|x_t|^p ≈ C + ξ(t)|x0|^p` under stationary-past noise.

use serde::{Deserialize, Serialize};

use super::{ensemble, norm, NoiseOptions};
use crate::error::{invalid, Error, Result};
use crate::fbm::{stationary_window, ConditionalSampler};
use crate::frac::HurstContext;
use crate::paths::{grid_steps_of, Grid};
use crate::rng::RngSeed;
use crate::sde::{solve_sde_with, ModelSpec, SolveOptions};
use crate::stats::Welford;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    pub noise: NoiseOptions,
    /// Largest tolerated fraction of ensemble members with a diverged solve.
    pub max_divergence_rate: f64,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        Self { noise: NoiseOptions::default(), max_divergence_rate: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovRow {
    pub x0: Vec<f64>,
    pub x0_norm_p: f64,
    pub moment: f64,
    pub stderr: f64,
    pub diverged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub p: f64,
    pub t: f64,
    pub fitted_c: f64,
    pub fitted_xi: f64,
    pub c_stderr: f64,
    pub xi_stderr: f64,
    pub per_x0: Vec<LyapunovRow>,
    pub n_samples: usize,
    /// Members excluded from the fit because at least one start diverged.
    pub diverged: usize,
    pub seed: RngSeed,
}

impl LyapunovReport {
    pub fn xi_ci95(&self) -> (f64, f64) {
        (self.fitted_xi - 1.96 * self.xi_stderr, self.fitted_xi + 1.96 * self.xi_stderr)
    }
}

/// Estimates `E|x_t|^p` for every start in `x0s` and fits `C + ξ |x0|^p` by least squares.
///
/// All starts share the noise of each ensemble member: a stationary past
/// window followed by a conditional future. The fit is linear in the
/// per-member moments, so `ξ` and `C` are averages of per-member fits and
/// their standard errors account for the shared noise. With `σ ≡ 0` every
/// member is identical and both standard errors are exactly zero.
pub fn lyapunov_check(
    model: &ModelSpec,
    p: f64,
    t: f64,
    x0s: &[Vec<f64>],
    n: usize,
    ctx: &HurstContext,
    seed: RngSeed,
    opts: &LyapunovOptions,
) -> Result<LyapunovReport> {
    let d = model.dim();
    if !(p > 0.0) || !(t > 0.0 && t <= 1.0) || n < 2 {
        return Err(invalid("lyapunov check needs p > 0, t in (0, 1] and at least two samples"));
    }
    if x0s.iter().any(|x| x.len() != d) {
        return Err(invalid("initial states have the wrong dimension"));
    }
    let hyp = model.check_hypotheses(64, 10.0, seed);
    if !(hyp.h1 && hyp.h3) {
        return Err(invalid(format!("model `{}` fails the regularity/dissipativity probes", model.name())));
    }
    let a: Vec<f64> = x0s.iter().map(|x| norm(x).powf(p)).collect();
    let m = a.len() as f64;
    let a_mean = a.iter().sum::<f64>() / m;
    let sxx: f64 = a.iter().map(|v| (v - a_mean).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(invalid("need at least two distinct |x0|^p values to fit"));
    }
    let l_xi: Vec<f64> = a.iter().map(|v| (v - a_mean) / sxx).collect();
    let l_c: Vec<f64> = l_xi.iter().map(|l| 1.0 / m - a_mean * l).collect();

    let noise = opts.noise;
    grid_steps_of(t, noise.dt)?;
    let future = Grid::forward(t, noise.dt)?;
    let window_len = grid_steps_of(noise.past_horizon, noise.dt)? + 1;
    let sampler = ConditionalSampler::new(ctx, noise.dt, window_len, future)?;
    let members = ensemble(n, seed, |_, s| -> Result<Vec<Option<f64>>> {
        let mut rng = s.rng();
        let w = stationary_window(noise.past_horizon, noise.dt, ctx.hurst(), d, &mut rng)?;
        let c = sampler.continue_with(&w, &mut rng)?;
        x0s.iter()
            .map(|x0| match solve_sde_with(model, x0, &c.path, SolveOptions::default()) {
                Ok(tr) => Ok(Some(norm(tr.endpoint()).powf(p))),
                Err(Error::Divergence { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect()
    });

    let mut per = vec![Welford::new(); x0s.len()];
    let mut div = vec![0usize; x0s.len()];
    let (mut xi_acc, mut c_acc) = (Welford::new(), Welford::new());
    let mut bad = 0usize;
    for member in members {
        let ys = member?;
        for (i, y) in ys.iter().enumerate() {
            match y {
                Some(y) => per[i].push(*y),
                None => div[i] += 1,
            }
        }
        if ys.iter().any(Option::is_none) {
            bad += 1;
            continue;
        }
        let ys: Vec<f64> = ys.into_iter().flatten().collect();
        xi_acc.push(ys.iter().zip(&l_xi).map(|(y, l)| y * l).sum());
        c_acc.push(ys.iter().zip(&l_c).map(|(y, l)| y * l).sum());
    }
    let rate = bad as f64 / n as f64;
    if rate > opts.max_divergence_rate {
        return Err(Error::Diagnostic(format!(
            "{bad} of {n} ensemble members diverged ({:.2}% > {:.2}%)",
            100.0 * rate,
            100.0 * opts.max_divergence_rate
        )));
    }
    let per_x0 = x0s
        .iter()
        .zip(&a)
        .zip(per.iter().zip(&div))
        .map(|((x0, &a), (acc, &dv))| LyapunovRow {
            x0: x0.clone(),
            x0_norm_p: a,
            moment: acc.mean(),
            stderr: acc.stderr(),
            diverged: dv,
        })
        .collect();
    Ok(LyapunovReport {
        p,
        t,
        fitted_c: c_acc.mean(),
        fitted_xi: xi_acc.mean(),
        c_stderr: c_acc.stderr(),
        xi_stderr: xi_acc.stderr(),
        per_x0,
        n_samples: n,
        diverged: bad,
        seed,
    })
}
