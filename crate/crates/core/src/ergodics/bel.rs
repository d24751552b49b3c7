//! Bismut–Elworthy–Li estimator of `D_ξ E φ(X^x)` under a fixed past.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ensemble, smooth_step, McSummary};
use crate::error::{invalid, Error, Result};
use crate::fbm::ConditionalSampler;
use crate::frac::{FracIntegrator, HurstContext};
use crate::paths::{holder_seminorm, Grid, NoiseWindow};
use crate::rng::RngSeed;
use crate::sde::{matmul, solve_sde_with, ModelSpec, SolveOptions};
use crate::stats::Welford;

/// Bounded functionals of the solution that only look at times `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Observable {
    Constant { value: f64 },
    /// Component of `X(T)`.
    Endpoint { component: usize },
    /// Component of `X(T)` clipped to `[-bound, bound]`.
    EndpointClipped { component: usize, bound: f64 },
}

impl Observable {
    /// Evaluates on the final state `X(T)`.
    pub fn evaluate(&self, endpoint: &[f64]) -> f64 {
        match *self {
            Observable::Constant { value } => value,
            Observable::Endpoint { component } => endpoint[component],
            Observable::EndpointClipped { component, bound } => endpoint[component].clamp(-bound, bound),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    /// `constant[:c]`, `endpoint[:j]` or `endpoint-clipped[:K]` (component 0).
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a.parse::<f64>().map_err(|_| Error::Parse(format!("bad observable argument `{a}`")))?)),
            None => (s, None),
        };
        match name {
            "constant" => Ok(Observable::Constant { value: arg.unwrap_or(1.0) }),
            "endpoint" => Ok(Observable::Endpoint { component: arg.unwrap_or(0.0) as usize }),
            "endpoint-clipped" => Ok(Observable::EndpointClipped { component: 0, bound: arg.unwrap_or(3.0) }),
            other => Err(Error::Parse(format!("unknown observable `{other}` (constant, endpoint, endpoint-clipped)"))),
        }
    }
}

/// Radii `(R, R')` of the cutoff `χ(N_1/R) χ(N_T/R')` on the Hölder norms of the future noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub r1: f64,
    pub rt: f64,
}

/// `χ(r) = 1` for `r <= 1`, `0` for `r >= 3`, smooth and decreasing between.
pub fn cutoff_chi(r: f64) -> f64 {
    1.0 - smooth_step((r - 1.0) / 2.0)
}

/// Unit-mass bump `30 t² (1 - t)²` on `(0, 1)`.
/// `∫_a^b bump`, from the antiderivative `10t³ - 15t⁴ + 6t⁵`.
pub fn bump_mass(a: f64, b: f64) -> f64 {
    let s = |t: f64| {
        let t = t.clamp(0.0, 1.0);
        t * t * t * (10.0 + t * (6.0 * t - 15.0))
    };
    s(b) - s(a)
}

pub fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        30.0 * t * t * (1.0 - t) * (1.0 - t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BelOptions {
    pub dt: f64,
    pub horizon: f64,
    pub cutoff: Option<Cutoff>,
    /// Samples where `|σ^{-1}|` exceeds this (or `σ` is singular) are rejected.
    pub max_sigma_inv: f64,
}

impl Default for BelOptions {
    fn default() -> Self {
        Self { dt: 1.0 / 64.0, horizon: 2.0, cutoff: None, max_sigma_inv: 1e6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BelReport {
    /// One-component estimate of `D_ξ E[φ]`.
    pub summary: McSummary,
    pub rejected: usize,
    /// Average cutoff weight over accepted samples (1 without a cutoff).
    pub mean_cutoff: f64,
}

/// Estimates `D_ξ E_w φ(X^x)` as `E[φ(X) ∫ <D^{H-1/2} v̇, dB>] / κ_H` with
/// `v̇(s) = h(s) σ^{-1}(x_s) J_s ξ` and `h` the unit bump on `(0, 1)`.
///
/// `B` is the Brownian path that generated each conditional future, and the
/// weight is its left-point Itô sum. Shifting `B` by the weight's integrand
/// moves the noise by `v`, which moves `X(t)` by `J_t ξ` for every `t >= 1`.
pub fn bel_gradient(
    model: &ModelSpec,
    phi: &Observable,
    x: &[f64],
    xi: &[f64],
    w: &NoiseWindow,
    n: usize,
    ctx: &HurstContext,
    seed: RngSeed,
    opts: &BelOptions,
) -> Result<BelReport> {
    let d = model.dim();
    if x.len() != d || xi.len() != d || w.dim() != d {
        return Err(invalid("state, direction and window must match the model dimension"));
    }
    if !(opts.horizon >= 1.0) || n < 2 {
        return Err(invalid("BEL estimator needs T >= 1 and at least two samples"));
    }
    let future = Grid::forward(opts.horizon, opts.dt)?;
    let sampler = ConditionalSampler::for_window(ctx, w, future)?;
    let integrator = FracIntegrator::new(ctx.kappa(), opts.dt, future.len())?;
    let scale = 1.0 / ctx.fresh_scale();
    let dt = opts.dt;
    let gamma = ctx.params().gamma;
    let one = future.index_of(1.0).ok_or_else(|| invalid("t = 1 must lie on the future grid"))?;
    let members = ensemble(n, seed, |_, s| -> Result<Option<(f64, f64)>> {
        let c = sampler.continue_with(w, &mut s.rng())?;
        let chi = match opts.cutoff {
            Some(cut) => {
                let n1 = holder_seminorm(&c.path.truncate(one)?, gamma)?;
                let nt = holder_seminorm(&c.path, gamma)?;
                cutoff_chi(n1 / cut.r1) * cutoff_chi(nt / cut.rt)
            }
            None => 1.0,
        };
        let tr = solve_sde_with(model, x, &c.path, SolveOptions { jacobian: true, ..SolveOptions::default() })?;
        let jac = tr.jacobian.as_ref().expect("jacobian requested");
        // v_k: increments bump-weighted sigma^{-1}(x_k) (I + Df(x_k) dt) J_k xi
        let mut v = vec![vec![0.0; future.len()]; d];
        let mut df = vec![0.0; d * d];
        for k in 0..future.len() - 1 {
            let mass = bump_mass(future.time(k), future.time(k + 1));
            if mass > 0.0 {
                let xk = tr.state.row(k);
                let Some(inv) = model.diffusion_inverse(xk) else {
                    return Ok(None);
                };
                if inv.iter().any(|v| !(v.abs() <= opts.max_sigma_inv)) {
                    return Ok(None);
                }
                model.dynamics().drift_jacobian(xk, &mut df);
                let mut step = df.iter().map(|a| a * dt).collect::<Vec<_>>();
                (0..d).for_each(|i| step[i * d + i] += 1.0);
                let m = matmul(d, &inv, &matmul(d, &step, jac.row(k)));
                for i in 0..d {
                    v[i][k + 1] = v[i][k] + mass * (0..d).map(|j| m[i * d + j] * xi[j]).sum::<f64>();
                }
            } else {
                (0..d).for_each(|i| v[i][k + 1] = v[i][k]);
            }
        }
        // Brownian shift whose fresh-noise image is v; Girsanov weight of the increments
        let mut weight = 0.0;
        for (i, vi) in v.iter().enumerate() {
            let shift = integrator.invert(vi);
            let b = c.brownian.component(i);
            weight += shift
                .windows(2)
                .zip(b.windows(2))
                .map(|(h, db)| (h[1] - h[0]) * (db[1] - db[0]))
                .sum::<f64>();
        }
        weight *= scale / dt;
        Ok(Some((chi * phi.evaluate(tr.endpoint()) * weight * scale, chi)))
    });
    let mut acc = Welford::new();
    let mut chi_acc = Welford::new();
    let mut rejected = 0;
    for m in members {
        match m? {
            Some((v, chi)) => {
                acc.push(v);
                chi_acc.push(chi);
            }
            None => rejected += 1,
        }
    }
    if acc.count() < 2 {
        return Err(Error::Diagnostic(format!("{rejected} of {n} samples rejected for an ill-conditioned diffusion")));
    }
    Ok(BelReport { summary: McSummary::from_accumulators(&[acc], seed), rejected, mean_cutoff: chi_acc.mean() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_has_unit_mass() {
        let n = 4096;
        let s: f64 = (0..n).map(|k| bump((k as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
        assert!((s - 1.0).abs() < 1e-6);
        let cells: f64 = (0..64).map(|k| bump_mass(k as f64 / 48.0, (k + 1) as f64 / 48.0)).sum();
        assert!((cells - 1.0).abs() < 1e-14);
        assert!((bump_mass(0.2, 0.3) - 0.1 * bump(0.25)).abs() < 1e-3);
    }

    #[test]
    fn chi_profile() {
        assert_eq!(cutoff_chi(0.5), 1.0);
        assert_eq!(cutoff_chi(3.5), 0.0);
        assert!((cutoff_chi(2.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn observables_parse() {
        assert_eq!("endpoint-clipped:2".parse::<Observable>().unwrap(), Observable::EndpointClipped { component: 0, bound: 2.0 });
        assert_eq!("constant".parse::<Observable>().unwrap(), Observable::Constant { value: 1.0 });
        assert!("nope".parse::<Observable>().is_err());
    }

    #[test]
    fn linear_in_direction() {
        let ctx = HurstContext::new(0.7).unwrap();
        let w = NoiseWindow::zeros(4.0, 1.0 / 32.0, 1).unwrap();
        let o = BelOptions { dt: 1.0 / 32.0, ..Default::default() };
        let phi = Observable::EndpointClipped { component: 0, bound: 2.0 };
        let m = ModelSpec::scalar();
        let a = bel_gradient(&m, &phi, &[0.3], &[1.0], &w, 200, &ctx, RngSeed::new(2), &o).unwrap();
        let b = bel_gradient(&m, &phi, &[0.3], &[2.0], &w, 200, &ctx, RngSeed::new(2), &o).unwrap();
        assert!((b.summary.estimate[0] - 2.0 * a.summary.estimate[0]).abs() < 1e-12);
    }
}
