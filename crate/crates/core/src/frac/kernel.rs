//! The memory kernel `g` and the conditional-mean operator `A`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::HurstContext;
use crate::error::{invalid, Result};
use crate::paths::{weighted_norm, Grid, NoiseWindow, SampledPath};
use crate::quad::GaussLegendre;

const G_START_NODES: usize = 128;
const G_MAX_NODES: usize = 8192;
const G_REL_TOL: f64 = 1e-10;

/// Gauss–Legendre tables with `128 * 2^k` nodes, built once per process.
pub(crate) fn legendre_table(level: usize) -> &'static GaussLegendre {
    static TABLES: [OnceLock<GaussLegendre>; 7] = [const { OnceLock::new() }; 7];
    TABLES[level].get_or_init(|| GaussLegendre::new(G_START_NODES << level))
}

/// Result of evaluating `g` by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub nodes: usize,
    pub est_error: f64,
}

/// `∫_0^1 (u + x)^{H - 5/2} (1 - u)^{1/2 - H} du` with `n` nodes per half.
fn kernel_integral(x: f64, hurst: f64, rule: &GaussLegendre) -> f64 {
    // u = x (e^s - 1) on [0, 1/2] flattens the (u + x)^{H - 5/2} peak.
    let s_max = (0.5 / x).ln_1p();
    let left: f64 = rule
        .mapped(0.0, s_max)
        .map(|(s, w)| {
            let u = x * s.exp_m1();
            w * x.powf(hurst - 1.5) * (s * (hurst - 1.5)).exp() * (1.0 - u).powf(0.5 - hurst)
        })
        .sum();
    // 1 - u = v^q with q = 1/(3/2 - H) absorbs (1 - u)^{1/2 - H}.
    let q = 1.0 / (1.5 - hurst);
    let v_max = 0.5f64.powf(1.5 - hurst);
    let right: f64 = rule
        .mapped(0.0, v_max)
        .map(|(v, w)| w * q * (1.0 - v.powf(q) + x).powf(hurst - 2.5))
        .sum();
    left + right
}

/// `g(x) = x^{H - 1/2} + (H - 3/2) x ∫_0^1 (u + x)^{H - 5/2} (1 - u)^{1/2 - H} du`,
/// with node doubling from 128 nodes until the relative change is at most `1e-10`.
pub fn kernel_g_detailed(x: f64, hurst: f64) -> Result<KernelValue> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(format!("kernel g needs x > 0, got {x}")));
    }
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(invalid(format!("Hurst parameter must lie in (1/2, 1), got {hurst}")));
    }
    let eval = |level: usize| {
        x.powf(hurst - 0.5) + (hurst - 1.5) * x * kernel_integral(x, hurst, legendre_table(level))
    };
    let mut prev = eval(0);
    let mut nodes = 2 * G_START_NODES;
    let mut level = 1;
    loop {
        let value = eval(level);
        let n = G_START_NODES << level;
        nodes += 2 * n;
        let est_error = (value - prev).abs();
        if est_error <= G_REL_TOL * value.abs() || n >= G_MAX_NODES {
            return Ok(KernelValue { value, nodes, est_error });
        }
        prev = value;
        level += 1;
    }
}

pub fn kernel_g(x: f64, hurst: f64) -> Result<f64> {
    kernel_g_detailed(x, hurst).map(|k| k.value)
}

/// Closed form `g(x) = x^{H + 1/2} / (1 + x)` of the same integral.
pub fn kernel_g_closed(x: f64, hurst: f64) -> f64 {
    x.powf(hurst + 0.5) / (1.0 + x)
}

/// Precomputed weights of `A` from a window of fixed step and length onto a
/// fixed output grid.
///
/// In the reflected variable `r = t / y` the operator reads
/// `A w(t) = β_H ∫_0^∞ t^{H+1/2} r^{-H-1/2} (r + t)^{-1} w(-r) dr`; it is
/// integrated exactly against the piecewise-linear interpolant of the window,
/// dropping `r > T_past`.
#[derive(Debug, Clone)]
pub struct MemoryOperator {
    beta: f64,
    hurst: f64,
    window_dt: f64,
    window_len: usize,
    out_grid: Grid,
    /// Row `i` holds the weights of `w̄(k dt)`, `k = 0..window_len`.
    weights: Vec<f64>,
}

impl MemoryOperator {
    pub fn new(ctx: &HurstContext, window_dt: f64, window_len: usize, out_grid: Grid) -> Result<Self> {
        if out_grid.t0() != 0.0 {
            return Err(invalid("output grid of A must start at 0"));
        }
        if window_len < 2 {
            return Err(invalid("degenerate window"));
        }
        let hurst = ctx.hurst();
        let p = hurst + 0.5;
        let near = GaussLegendre::new(16);
        let far = GaussLegendre::new(6);
        let cells = window_len - 1;
        // (cell, node r, weight * r^{-H-1/2}, λ) with λ the position within the cell.
        let mut nodes: Vec<(usize, f64, f64, f64)> = Vec::new();
        let q = 1.0 / (1.5 - hurst);
        for (u, w) in near.mapped(0.0, 1.0) {
            // r = dt u^q; r^{-H-1/2} λ dr = q dt^{1/2-H} du, only the right end carries weight.
            let r = window_dt * u.powf(q);
            nodes.push((0, r, w * q * window_dt.powf(0.5 - hurst), f64::NAN));
        }
        for k in 1..cells {
            let (a, b) = (k as f64 * window_dt, (k + 1) as f64 * window_dt);
            let rule = if k < 4 { &near } else { &far };
            for (r, w) in rule.mapped(a, b) {
                nodes.push((k, r, w * r.powf(-p), (r - a) / window_dt));
            }
        }
        let n_out = out_grid.len();
        let mut weights = vec![0.0; n_out * window_len];
        for i in 1..n_out {
            let t = out_grid.time(i);
            let tp = t.powf(p);
            let row = &mut weights[i * window_len..(i + 1) * window_len];
            for &(k, r, base, lam) in &nodes {
                let kern = tp * base / (r + t);
                if k == 0 {
                    row[1] += kern;
                } else {
                    row[k] += kern * (1.0 - lam);
                    row[k + 1] += kern * lam;
                }
            }
        }
        Ok(Self { beta: ctx.beta(), hurst, window_dt, window_len, out_grid, weights })
    }

    pub fn out_grid(&self) -> &Grid {
        &self.out_grid
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn window_dt(&self) -> f64 {
        self.window_dt
    }

    /// Applies `A` to a reflected scalar window `w̄(k dt) = w(-k dt)`.
    pub fn apply_reflected(&self, reflected: &[f64]) -> Vec<f64> {
        assert_eq!(reflected.len(), self.window_len, "window length mismatch");
        self.weights
            .chunks_exact(self.window_len)
            .map(|row| self.beta * row.iter().zip(reflected).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    fn check_window(&self, w: &NoiseWindow) -> Result<()> {
        if w.len() != self.window_len || (w.dt() - self.window_dt).abs() > 1e-12 * self.window_dt {
            return Err(invalid("window does not match the precomputed memory operator"));
        }
        Ok(())
    }

    pub fn apply(&self, w: &NoiseWindow) -> Result<SampledPath> {
        self.check_window(w)?;
        let comps: Vec<Vec<f64>> = (0..w.dim()).map(|j| self.apply_reflected(&w.reflected_component(j))).collect();
        SampledPath::from_components(self.out_grid, &comps)
    }

    /// Bound on the dropped tail `r > T_past` at the last output time, in terms of
    /// the weighted norm of `w`, assuming that norm also controls the discarded past.
    pub fn truncation_bound(&self, ctx: &HurstContext, w: &NoiseWindow) -> Result<f64> {
        let p = ctx.params();
        let norm = weighted_norm(w, p)?;
        Ok(truncation_bound(self.beta, self.hurst, p.gamma, p.delta, norm, self.out_grid.end(), w.horizon()))
    }
}

/// `|β| ‖w‖ 2^δ t^{H+1/2} T^{γ+δ-H-1/2} / (H + 1/2 - γ - δ)`, from `g(y) <= y^{H+1/2}`
/// and `|w(-r)| <= ‖w‖ r^γ (1 + r)^δ`.
pub(crate) fn truncation_bound(beta: f64, hurst: f64, gamma: f64, delta: f64, norm: f64, t: f64, horizon: f64) -> f64 {
    let e = hurst + 0.5 - gamma - delta;
    beta.abs() * norm * 2f64.powf(delta) * t.powf(hurst + 0.5) * horizon.powf(-e) / e
}

/// `A w` together with a bound on the truncation error.
#[derive(Debug, Clone)]
pub struct MemoryResult {
    pub path: SampledPath,
    pub truncation_bound: f64,
}

/// `A w` on `out_grid` (which must start at 0).
pub fn apply_a(w: &NoiseWindow, out_grid: &Grid, ctx: &HurstContext) -> Result<MemoryResult> {
    let op = MemoryOperator::new(ctx, w.dt(), w.len(), *out_grid)?;
    let path = op.apply(w)?;
    let truncation_bound = op.truncation_bound(ctx, w)?;
    Ok(MemoryResult { path, truncation_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_at_one_is_one_half() {
        let k = kernel_g_detailed(1.0, 0.7).unwrap();
        assert!((k.value - 0.5).abs() < 1e-12, "{k:?}");
        assert!(k.nodes >= 2 * G_START_NODES);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for &h in &[0.55, 0.7, 0.9] {
            for &x in &[1e-4, 1e-2, 0.3, 1.0, 7.0, 1e3, 1e4] {
                let q = kernel_g(x, h).unwrap();
                let c = kernel_g_closed(x, h);
                assert!((q - c).abs() <= 1e-7 * c.max(1e-300), "H={h} x={x}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn g_rejects_nonpositive_argument() {
        assert!(kernel_g(0.0, 0.7).is_err());
        assert!(kernel_g(-1.0, 0.7).is_err());
    }

    #[test]
    fn memory_operator_kills_zero_window_and_is_linear() {
        let ctx = HurstContext::new(0.7).unwrap();
        let g = Grid::forward(1.0, 0.0625).unwrap();
        let z = NoiseWindow::zeros(8.0, 0.0625, 1).unwrap();
        let r = apply_a(&z, &g, &ctx).unwrap();
        assert!(r.path.values().iter().all(|&v| v == 0.0));
        let w1 = NoiseWindow::from_fn(8.0, 0.0625, 1, |s| vec![(s * 1.3).sin()]).unwrap();
        let w2 = NoiseWindow::from_fn(8.0, 0.0625, 1, |s| vec![s * s * 0.1]).unwrap();
        let a1 = apply_a(&w1, &g, &ctx).unwrap().path;
        let a2 = apply_a(&w2, &g, &ctx).unwrap().path;
        let combo = apply_a(&w1.combine(2.0, &w2, -0.5).unwrap(), &g, &ctx).unwrap().path;
        let expect = a1.combine(2.0, &a2, -0.5).unwrap();
        assert!(combo.max_abs_diff(&expect) < 1e-12);
        assert_eq!(combo.get(0, 0), 0.0);
    }
}
