//! Densities on a shared reference, their meet, the mollified shift and
//! subcouplings of the noise semigroup on a finite projection.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{norm, smooth_step};
use crate::error::{invalid, Result};
use crate::fbm::ConditionalSampler;
use crate::frac::HurstContext;
use crate::paths::{grid_steps, Grid, NoiseWindow};
use crate::quad::{tanh_sinh, GaussLegendre};

/// Quadrature nodes and weights of a reference measure on `R^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Reference {
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.len() != dim * weights.len() || weights.is_empty() {
            return Err(invalid("reference needs one weight per point"));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || points.iter().any(|p| !p.is_finite()) {
            return Err(invalid("reference weights must be finite and nonnegative"));
        }
        Ok(Self { dim, points, weights })
    }

    /// Trapezoid rule with `n` points on `[lo, hi]`.
    pub fn uniform_1d(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || n < 2 {
            return Err(invalid("uniform reference needs lo < hi and n >= 2"));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let points = (0..n).map(|i| lo + i as f64 * h).collect();
        let weights = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect();
        Self::new(1, points, weights)
    }

    /// `n` Halton points inside `ball`, each weighted `vol(ball) / n`.
    pub fn halton_ball(ball: &Ball, n: usize) -> Result<Self> {
        let k = ball.center.len();
        if k == 0 || k > PRIMES.len() || !(ball.radius > 0.0) || n == 0 {
            return Err(invalid(format!("Halton ball needs 1..={} dimensions and a positive radius", PRIMES.len())));
        }
        let mut points = Vec::with_capacity(n * k);
        let mut y = vec![0.0; k];
        let mut index = 1u64;
        while points.len() < n * k {
            for (j, v) in y.iter_mut().enumerate() {
                *v = 2.0 * radical_inverse(index, PRIMES[j]) - 1.0;
            }
            index += 1;
            if norm(&y) <= 1.0 {
                points.extend(y.iter().zip(&ball.center).map(|(y, c)| c + ball.radius * y));
            }
        }
        Self::new(k, points, vec![ball.volume() / n as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// A measure `D(x) μ(dx)` stored as density values at the nodes of `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedDensity {
    reference: Arc<Reference>,
    density: Vec<f64>,
}

impl GriddedDensity {
    pub fn new(reference: Arc<Reference>, density: Vec<f64>) -> Result<Self> {
        if density.len() != reference.len() {
            return Err(invalid("density needs one value per reference node"));
        }
        if density.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(invalid("densities must be finite and nonnegative"));
        }
        Ok(Self { reference, density })
    }

    pub fn from_fn(reference: Arc<Reference>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let density = (0..reference.len()).map(|i| f(reference.point(i))).collect();
        Self::new(reference, density)
    }

    pub fn reference(&self) -> &Arc<Reference> {
        &self.reference
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().zip(self.reference.weights()).map(|(d, w)| d * w).sum()
    }
}

/// `min{D_1, D_2} μ`, the largest measure below both.
pub fn meet_measure(a: &GriddedDensity, b: &GriddedDensity) -> Result<GriddedDensity> {
    if !Arc::ptr_eq(&a.reference, &b.reference) && a.reference != b.reference {
        return Err(invalid("densities live on different grids"));
    }
    let density = a.density.iter().zip(&b.density).map(|(x, y)| x.min(*y)).collect();
    GriddedDensity::new(a.reference.clone(), density)
}

/// Unit-mass `C^∞` bump supported in `[-2, -1]`.
fn psi(z: f64) -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    let c = *NORM.get_or_init(|| 1.0 / tanh_sinh(-2.0, -1.0, 1e-14, |z, _, _| psi_raw(z)).value);
    c * psi_raw(z)
}

fn psi_raw(z: f64) -> f64 {
    let y = 2.0 * z + 3.0;
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

/// Decreasing profile: `1` on `(-∞, -2]`, `0` on `[-1, ∞)`.
fn phi(tau: f64) -> f64 {
    1.0 - smooth_step(tau + 2.0)
}

/// `K_ε h(t) = φ(t/ε) ∫ h(r) ε^{-1} ψ((r - t)/ε) dr` for a window `h0` that is
/// constant before `-s`.
///
/// The output equals `h0(-s)` on `(-∞, -s + ε]` and `0` on `[-ε, 0]`, so its
/// derivative is supported in `[-s + ε, -ε]`; between, `h0` is read as its
/// piecewise-linear interpolant and integrated cell by cell.
pub fn smooth_shift_k(h0: &NoiseWindow, s: f64, eps: f64) -> Result<NoiseWindow> {
    let dt = h0.dt();
    let ls = grid_steps(s, dt).ok_or_else(|| invalid("s must be a positive multiple of the window step"))?;
    if ls == 0 || ls >= h0.len() {
        return Err(invalid("s must be positive and inside the window"));
    }
    if !(eps > 0.0 && eps <= 0.25 * s) {
        return Err(invalid(format!("mollifier width must lie in (0, s/4], got {eps} for s = {s}")));
    }
    let d = h0.dim();
    let n = h0.len();
    let gl = GaussLegendre::new(8);
    let mut comps = Vec::with_capacity(d);
    for j in 0..d {
        let c0 = h0.at_lag(ls, j);
        let tol = 1e-12 * (1.0 + c0.abs());
        if (ls..n).any(|lag| (h0.at_lag(lag, j) - c0).abs() > tol) {
            return Err(invalid("h0 must be constant before -s"));
        }
        // value at fractional lag ρ (time -ρ dt), constant beyond -s
        let at = |rho: f64| -> f64 {
            if rho >= ls as f64 {
                return c0;
            }
            let i = rho.floor() as usize;
            let lam = rho - i as f64;
            h0.at_lag(i, j) * (1.0 - lam) + h0.at_lag(i + 1, j) * lam
        };
        let mut out = vec![0.0; n];
        for (lag, o) in out.iter_mut().enumerate() {
            let t = -(lag as f64) * dt;
            *o = if t >= -eps {
                0.0
            } else if t <= -s + eps {
                c0
            } else {
                // r ∈ [t - 2ε, t - ε], i.e. lags in [ρ_lo, ρ_hi]
                let (rho_lo, rho_hi) = ((-t + eps) / dt, (-t + 2.0 * eps) / dt);
                let mut cuts = vec![rho_lo];
                let mut c = rho_lo.floor() + 1.0;
                while c < rho_hi {
                    cuts.push(c);
                    c += 1.0;
                }
                cuts.push(rho_hi);
                let mut acc = 0.0;
                for p in cuts.windows(2) {
                    for (rho, wq) in gl.mapped(p[0], p[1]) {
                        let r = -rho * dt;
                        acc += wq * dt / eps * psi((r - t) / eps) * at(rho);
                    }
                }
                phi(t / eps) * acc
            };
        }
        comps.push(out);
    }
    let raw = (0..n).flat_map(|k| comps.iter().map(move |c| c[n - 1 - k])).collect();
    NoiseWindow::from_raw(dt, d, raw)
}

/// Closed Euclidean ball in the projected coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, x: &[f64]) -> bool {
        let d: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        d <= self.radius * self.radius
    }

    pub fn volume(&self) -> f64 {
        let k = self.center.len() as f64;
        std::f64::consts::PI.powf(k / 2.0) / statrs::function::gamma::gamma(k / 2.0 + 1.0) * self.radius.powf(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SubcouplingOptions {
    /// Number of projected coordinates.
    pub k: usize,
    /// Quadrature nodes per ball.
    pub nodes: usize,
    /// Mollifier width; by default the largest `s 2^{-m}` (`m >= 2`) whose
    /// projected shift is within half the smaller radius of the target.
    pub epsilon: Option<f64>,
}

impl Default for SubcouplingOptions {
    fn default() -> Self {
        Self { k: 8, nodes: 4096, epsilon: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubcouplingReport {
    /// Density of the first marginal of the coupling on the nodes of `U`;
    /// the coupling sits on the graph `a ↦ a + shift`.
    #[serde(skip)]
    pub coupling: GriddedDensity,
    pub mean: Vec<f64>,
    pub shift: Vec<f64>,
    pub target_shift: Vec<f64>,
    pub epsilon: f64,
    pub mass: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    pub first_marginal_dominated: bool,
    pub second_marginal_dominated: bool,
    /// A ball carries no (numerically detectable) mass; the coupling is empty.
    pub empty: bool,
}

impl SubcouplingReport {
    pub fn positive(&self) -> bool {
        self.mass > 0.0
    }
}

/// Law of `k` coordinates of the window after one step, `z_j = w'(-s + j s/k)`.
struct ProjectedLaw {
    mean: DVector<f64>,
    chol_inv: DMatrix<f64>,
    log_norm: f64,
}

impl ProjectedLaw {
    fn new(w: &NoiseWindow, s: f64, k: usize, ctx: &HurstContext) -> Result<Self> {
        let dt = w.dt();
        let nf = grid_steps(s, dt).ok_or_else(|| invalid("s must be a multiple of the window step"))?;
        if k == 0 || nf % k != 0 {
            return Err(invalid("s must split into k whole numbers of window steps"));
        }
        let sampler = ConditionalSampler::for_window(ctx, w, Grid::forward(s, dt)?)?;
        let a = sampler.mean(w)?.component(0);
        let stride = nf / k;
        let idx: Vec<usize> = (0..k).map(|j| j * stride).collect();
        let mean = DVector::from_iterator(k, idx.iter().map(|&i| a[i] - a[nf]));
        // fresh part: κ I^{H-1/2} of a unit step in the Brownian path at increment q
        let mut q = DMatrix::zeros(k, nf);
        for inc in 0..nf {
            let b: Vec<f64> = (0..=nf).map(|i| if i > inc { 1.0 } else { 0.0 }).collect();
            let col = sampler.fresh_part(&b);
            for (j, &i) in idx.iter().enumerate() {
                q[(j, inc)] = col[i] - col[nf];
            }
        }
        let cov = &q * q.transpose() * dt;
        let chol = cov.cholesky().ok_or_else(|| invalid("projected covariance is singular"))?;
        let l = chol.l();
        let log_det_half: f64 = (0..k).map(|i| l[(i, i)].ln()).sum();
        let chol_inv = l.try_inverse().ok_or_else(|| invalid("projected covariance is singular"))?;
        let log_norm = -log_det_half - 0.5 * k as f64 * (2.0 * std::f64::consts::PI).ln();
        Ok(Self { mean, chol_inv, log_norm })
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        let r = DVector::from_column_slice(x) - &self.mean;
        let z = &self.chol_inv * r;
        (self.log_norm - 0.5 * z.norm_squared()).exp()
    }
}

/// Projected subcoupling of `P_s(w, ·)|_U` and `P_s(w, ·)|_V` through the shift
/// `a ↦ a + η`, where `η` projects the mollified lift of `c_V - c_U`.
///
/// Coordinates are those of the first noise component. The first marginal
/// has density `min{p 1_U, p(· + η) 1_V(· + η)}` on Halton nodes of the smaller
/// of `U` and `V - η`, so both domination checks are pointwise and exact.
pub fn subcoupling_build(
    w: &NoiseWindow,
    u: &Ball,
    v: &Ball,
    s: f64,
    ctx: &HurstContext,
    opts: &SubcouplingOptions,
) -> Result<SubcouplingReport> {
    let k = opts.k;
    if u.center.len() != k || v.center.len() != k {
        return Err(invalid(format!("balls must live in the {k}-dimensional projection")));
    }
    if !(u.radius > 0.0 && v.radius > 0.0) {
        return Err(invalid("ball radii must be positive"));
    }
    let law = ProjectedLaw::new(w, s, k, ctx)?;
    let target: Vec<f64> = v.center.iter().zip(&u.center).map(|(a, b)| a - b).collect();

    let dt = w.dt();
    let lift = lift_coordinates(&target, s, dt)?;
    let lags: Vec<usize> = (0..k).map(|j| grid_steps(s - j as f64 * s / k as f64, dt).expect("on grid")).collect();
    let project = |eps: f64| -> Result<Vec<f64>> {
        let m = smooth_shift_k(&lift, s, eps)?;
        Ok(lags.iter().map(|&l| m.at_lag(l, 0)).collect())
    };
    let tol = 0.5 * u.radius.min(v.radius);
    let (epsilon, shift) = match opts.epsilon {
        Some(e) => (e, project(e)?),
        None => {
            let mut best = None;
            for m in 2..=12 {
                let e = s * 0.5f64.powi(m);
                let eta = project(e)?;
                let err = norm(&eta.iter().zip(&target).map(|(a, b)| a - b).collect::<Vec<_>>());
                let done = err <= tol;
                best = Some((e, eta));
                if done {
                    break;
                }
            }
            best.expect("at least one candidate")
        }
    };

    let ref_u = Arc::new(Reference::halton_ball(u, opts.nodes)?);
    let ref_v = Arc::new(Reference::halton_ball(v, opts.nodes)?);
    // the meet lives in U ∩ (V - η); nodes go in the smaller of the two balls
    let support = if v.radius < u.radius {
        let pulled = Ball { center: v.center.iter().zip(&shift).map(|(c, h)| c - h).collect(), radius: v.radius };
        Arc::new(Reference::halton_ball(&pulled, opts.nodes)?)
    } else {
        ref_u.clone()
    };
    let mass_u = GriddedDensity::from_fn(ref_u, |a| law.pdf(a))?.mass();
    let d1 = GriddedDensity::from_fn(support.clone(), |a| if u.contains(a) { law.pdf(a) } else { 0.0 })?;
    let d2 = GriddedDensity::from_fn(support, |a| {
        let b: Vec<f64> = a.iter().zip(&shift).map(|(a, h)| a + h).collect();
        if v.contains(&b) {
            law.pdf(&b)
        } else {
            0.0
        }
    })?;
    let mass_v = GriddedDensity::from_fn(ref_v, |b| law.pdf(b))?.mass();
    let coupling = meet_measure(&d1, &d2)?;
    let first = coupling.density().iter().zip(d1.density()).all(|(c, d)| c <= d);
    let second = coupling.density().iter().zip(d2.density()).all(|(c, d)| c <= d);
    Ok(SubcouplingReport {
        mass: coupling.mass(),
        coupling,
        mean: law.mean.iter().copied().collect(),
        shift,
        target_shift: target,
        epsilon,
        mass_u,
        mass_v,
        first_marginal_dominated: first,
        second_marginal_dominated: second,
        empty: mass_u == 0.0 || mass_v == 0.0,
    })
}

/// Piecewise-linear window through `values[j]` at `-s + j s/k` and `0` at `0`,
/// constant before `-s`; horizon `2s`.
fn lift_coordinates(values: &[f64], s: f64, dt: f64) -> Result<NoiseWindow> {
    let k = values.len();
    let knot = s / k as f64;
    NoiseWindow::from_fn(2.0 * s, dt, 1, |t| {
        let tau = t + s;
        if tau <= 0.0 {
            return vec![values[0]];
        }
        let pos = (tau / knot).min(k as f64);
        let j = (pos.floor() as usize).min(k - 1);
        let lam = pos - j as f64;
        let next = if j + 1 < k { values[j + 1] } else { 0.0 };
        vec![values[j] * (1.0 - lam) + next * lam]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_has_unit_mass() {
        let gl = GaussLegendre::new(64);
        let m: f64 = (0..32).map(|i| gl.integrate(-2.0 + i as f64 / 32.0, -2.0 + (i + 1) as f64 / 32.0, psi)).sum();
        assert!((m - 1.0).abs() < 1e-10);
        assert_eq!(psi(-0.9), 0.0);
        assert_eq!(phi(-2.5), 1.0);
        assert_eq!(phi(-0.5), 0.0);
    }

    #[test]
    fn meet_of_self_and_disjoint() {
        let r = Arc::new(Reference::uniform_1d(-1.0, 1.0, 21).unwrap());
        let a = GriddedDensity::from_fn(r.clone(), |x| if x[0] < 0.0 { 1.0 } else { 0.0 }).unwrap();
        let b = GriddedDensity::from_fn(r.clone(), |x| if x[0] > 0.0 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(meet_measure(&a, &a).unwrap(), a);
        assert_eq!(meet_measure(&a, &b).unwrap().mass(), 0.0);
        let other = Arc::new(Reference::uniform_1d(-1.0, 1.0, 11).unwrap());
        let c = GriddedDensity::from_fn(other, |_| 1.0).unwrap();
        assert!(meet_measure(&a, &c).is_err());
    }

    #[test]
    fn mollifier_of_zero_and_width_check() {
        let z = NoiseWindow::zeros(2.0, 1.0 / 64.0, 1).unwrap();
        assert_eq!(smooth_shift_k(&z, 1.0, 0.125).unwrap(), z);
        assert!(smooth_shift_k(&z, 1.0, 0.3).is_err());
        let bumpy = NoiseWindow::from_fn(2.0, 1.0 / 64.0, 1, |t| vec![t.sin()]).unwrap();
        assert!(smooth_shift_k(&bumpy, 1.0, 0.125).is_err());
    }

    #[test]
    fn halton_ball_volume() {
        let b = Ball { center: vec![0.0; 3], radius: 2.0 };
        let r = Reference::halton_ball(&b, 500).unwrap();
        assert!((0..r.len()).all(|i| b.contains(r.point(i))));
        let vol: f64 = r.weights().iter().sum();
        assert!((vol - 4.0 / 3.0 * std::f64::consts::PI * 8.0).abs() < 1e-9);
    }
}
