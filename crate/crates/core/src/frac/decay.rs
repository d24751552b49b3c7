//! Decay of `D^{H+1/2} A h` for windows `h` whose derivative is a bump.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::HurstContext;
use crate::error::{invalid, Result};
use crate::paths::NoiseWindow;
use crate::quad::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayOptions {
    pub t_min: f64,
    pub t_max: f64,
    /// Number of log-spaced evaluation times.
    pub points: usize,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self { t_min: 1e-3, t_max: 1e3, points: 121 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub hurst: f64,
    pub times: Vec<f64>,
    /// Signed values of `D^{H+1/2} A h`.
    pub values: Vec<f64>,
    /// `C min{1/t, t^{1/2-H}}` with the smallest admissible `C`.
    pub envelope: Vec<f64>,
    pub envelope_constant: f64,
    /// `∫_0^∞ |D^{H+1/2} A h|^2 dt` with power-law tails beyond the grid.
    pub l2_integral: f64,
}

impl DecayReport {
    /// CSV with columns `t, |value|, envelope`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut s = String::from("t,abs_value,envelope\n");
        for ((t, v), e) in self.times.iter().zip(&self.values).zip(&self.envelope) {
            s.push_str(&format!("{t},{},{e}\n", v.abs()));
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }
}

/// `D^{H+1/2} A h(t) = β_H ∫_0^∞ Φ(s) / (s + t) ds` with `Φ = D^{H-1/2} h̄'`,
/// `h̄(s) = h(-s)`; `h̄'` is taken piecewise linear between grid nodes.
struct DecayEvaluator {
    beta: f64,
    /// (s, weight * Φ(s)) quadrature pairs covering `[s_0, ∞)`.
    nodes: Vec<(f64, f64)>,
}

impl DecayEvaluator {
    fn new(h: &NoiseWindow, ctx: &HurstContext) -> Result<Self> {
        if h.dim() != 1 {
            return Err(invalid("decay report needs a scalar window"));
        }
        let hb = h.reflected_component(0);
        let n = hb.len();
        let dt = h.dt();
        let moving: Vec<usize> = (0..n - 1).filter(|&k| hb[k + 1] != hb[k]).collect();
        let (kmin, kmax) = match (moving.first(), moving.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(invalid("window is constant; its derivative has empty support")),
        };
        if kmin < 2 || kmax + 3 > n - 1 {
            return Err(invalid("derivative of h must be supported strictly inside the window"));
        }
        // h̄' at nodes kmin - 1 ..= kmax + 2; both ends vanish.
        let first = kmin - 1;
        let deriv: Vec<f64> = (first..=kmax + 2).map(|k| (hb[k + 1] - hb[k - 1]) / (2.0 * dt)).collect();
        let knots: Vec<f64> = (0..deriv.len()).map(|j| (first + j) as f64 * dt).collect();
        let slopes: Vec<f64> = deriv.windows(2).map(|p| (p[1] - p[0]) / dt).collect();
        let kappa = ctx.kappa();
        let e = 1.0 - kappa;
        let norm = 1.0 / gamma(2.0 - kappa);
        let phi = |s: f64| -> f64 {
            let mut acc = 0.0;
            for (j, &m) in slopes.iter().enumerate() {
                let (a, b) = (knots[j], knots[j + 1]);
                if s <= a || m == 0.0 {
                    continue;
                }
                let term = if s <= b {
                    (s - a).powf(e)
                } else {
                    // (s - a)^e - (s - b)^e without cancellation
                    -(s - a).powf(e) * (e * (-(b - a) / (s - a)).ln_1p()).exp_m1()
                };
                acc += m * term;
            }
            norm * acc
        };
        let s0 = knots[0];
        let s1 = *knots.last().unwrap();
        let mut nodes = Vec::new();
        let cell_rule = GaussLegendre::new(4);
        for j in 0..knots.len() - 1 {
            for (s, w) in cell_rule.mapped(knots[j], knots[j + 1]) {
                nodes.push((s, w * phi(s)));
            }
        }
        // s = s1 + L v/(1 - v), v = 1 - (1 - x)^4 on the tail.
        let width = (s1 - s0).max(dt);
        let tail_rule = GaussLegendre::new(2048);
        for (x, w) in tail_rule.mapped(0.0, 1.0) {
            let om = 1.0 - x;
            let one_minus_v = om.powi(4);
            let s = s1 + width * (1.0 - one_minus_v) / one_minus_v;
            let jac = 4.0 * width * om.powi(-5);
            nodes.push((s, w * jac * phi(s)));
        }
        Ok(Self { beta: ctx.beta(), nodes })
    }

    fn value(&self, t: f64) -> f64 {
        self.beta * self.nodes.iter().map(|(s, wp)| wp / (s + t)).sum::<f64>()
    }
}

fn log_grid(opts: &DecayOptions) -> Result<Vec<f64>> {
    if !(opts.t_min > 0.0 && opts.t_max > opts.t_min && opts.points >= 2) {
        return Err(invalid("decay grid needs 0 < t_min < t_max and at least 2 points"));
    }
    let (a, b) = (opts.t_min.ln(), opts.t_max.ln());
    Ok((0..opts.points).map(|i| (a + (b - a) * i as f64 / (opts.points - 1) as f64).exp()).collect())
}

/// Evaluates `|D^{H+1/2} A h|` on a log-spaced grid, fits the envelope
/// `C min{1/t, t^{1/2-H}}` and integrates the square.
pub fn decay_da(h: &NoiseWindow, ctx: &HurstContext, opts: &DecayOptions) -> Result<DecayReport> {
    let eval = DecayEvaluator::new(h, ctx)?;
    let times = log_grid(opts)?;
    let values: Vec<f64> = times.iter().map(|&t| eval.value(t)).collect();
    let hurst = ctx.hurst();
    let shape = |t: f64| (1.0 / t).min(t.powf(0.5 - hurst));
    let envelope_constant = times.iter().zip(&values).map(|(&t, v)| v.abs() / shape(t)).fold(0.0, f64::max);
    let envelope = times.iter().map(|&t| envelope_constant * shape(t)).collect();

    // trapezoid in log t of v^2 t
    let mut l2 = 0.0;
    for i in 0..times.len() - 1 {
        let (t0, t1) = (times[i], times[i + 1]);
        let f0 = values[i] * values[i] * t0;
        let f1 = values[i + 1] * values[i + 1] * t1;
        l2 += 0.5 * (f0 + f1) * (t1.ln() - t0.ln());
    }
    // D is bounded near 0 and decays at least like 1/t at infinity.
    let (tf, vf) = (times[0], values[0]);
    l2 += vf * vf * tf;
    let (tl, vl) = (*times.last().unwrap(), *values.last().unwrap());
    l2 += vl * vl * tl;
    Ok(DecayReport { hurst, times, values, envelope, envelope_constant, l2_integral: l2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_support_touching_the_origin() {
        let ctx = HurstContext::new(0.7).unwrap();
        let w = NoiseWindow::from_fn(4.0, 0.01, 1, |s| vec![s]).unwrap();
        assert!(decay_da(&w, &ctx, &DecayOptions::default()).is_err());
        let z = NoiseWindow::zeros(4.0, 0.01, 1).unwrap();
        assert!(decay_da(&z, &ctx, &DecayOptions::default()).is_err());
    }
}
