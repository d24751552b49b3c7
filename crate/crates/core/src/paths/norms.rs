use serde::{Deserialize, Serialize};

use super::{NoiseWindow, SampledPath};
use crate::error::{invalid, Result};

/// Exponents `(γ, δ)` of the weighted Hölder space of noise windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderParams {
    pub gamma: f64,
    pub delta: f64,
}

impl HolderParams {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma > 0.5 && gamma < 1.0) {
            return Err(invalid(format!("gamma must lie in (1/2, 1), got {gamma}")));
        }
        if !(delta > 0.0 && gamma + delta < 1.0) {
            return Err(invalid(format!("need delta > 0 and gamma + delta < 1, got ({gamma}, {delta})")));
        }
        Ok(Self { gamma, delta })
    }

    /// Checks `1/2 < γ < H < γ + δ < 1`.
    pub fn check_hurst(&self, hurst: f64) -> Result<()> {
        if !(self.gamma < hurst && hurst < self.gamma + self.delta) {
            return Err(invalid(format!(
                "Hölder parameters ({}, {}) incompatible with H = {hurst}",
                self.gamma, self.delta
            )));
        }
        Ok(())
    }

    /// Midpoint choice `γ = (1/2 + H)/2`, `δ` centred in `(H - γ, 1 - γ)`.
    pub fn default_for(hurst: f64) -> Result<Self> {
        let gamma = 0.5 * (0.5 + hurst);
        let delta = 0.5 * ((hurst - gamma) + (1.0 - gamma));
        Self::new(gamma, delta)
    }
}

/// Max over grid pairs of `|x(t) - x(s)| / (|t - s|^γ (1 + |t| + |s|)^δ)`.
///
/// `times` must be uniform with step `dt`; `row_norm` maps a row-difference
/// to a nonnegative size.
fn pair_max(
    n: usize,
    t0: f64,
    dt: f64,
    gamma: f64,
    delta: f64,
    diff: impl Fn(usize, usize) -> f64,
) -> Result<f64> {
    if n < 2 {
        return Err(invalid("norm needs at least 2 grid points"));
    }
    let lag_pow: Vec<f64> = (0..n).map(|l| (l as f64 * dt).powf(gamma)).collect();
    let abs_t: Vec<f64> = (0..n).map(|k| (t0 + k as f64 * dt).abs()).collect();
    let same_sign = t0 >= 0.0 || t0 + (n - 1) as f64 * dt <= 0.0;
    // On a one-signed uniform grid |t|+|s| depends only on i + j.
    let sum_pow: Option<Vec<f64>> = (same_sign && delta != 0.0)
        .then(|| (0..2 * n - 1).map(|m| (1.0 + (t0 * 2.0 + m as f64 * dt).abs()).powf(delta)).collect());
    let mut best = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let weight = match (&sum_pow, delta == 0.0) {
                (_, true) => 1.0,
                (Some(sp), _) => sp[i + j],
                (None, _) => (1.0 + abs_t[i] + abs_t[j]).powf(delta),
            };
            let v = diff(i, j) / (lag_pow[j - i] * weight);
            if v > best {
                best = v;
            }
        }
    }
    Ok(best)
}

fn euclid(values: &[f64], dim: usize, i: usize, j: usize) -> f64 {
    (0..dim)
        .map(|c| {
            let d = values[j * dim + c] - values[i * dim + c];
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Weighted Hölder norm of a path on any uniform grid (Euclidean increments).
pub fn weighted_holder_norm(path: &SampledPath, gamma: f64, delta: f64) -> Result<f64> {
    let g = path.grid();
    let (v, d) = (path.values(), path.dim());
    pair_max(g.len(), g.t0(), g.dt(), gamma, delta, |i, j| euclid(v, d, i, j))
}

/// Weighted norm of a noise window.
pub fn weighted_norm(w: &NoiseWindow, p: &HolderParams) -> Result<f64> {
    let g = w.grid();
    let (v, d) = (w.values(), w.dim());
    pair_max(g.len(), g.t0(), g.dt(), p.gamma, p.delta, |i, j| euclid(&v, d, i, j))
}

pub fn weighted_norm_component(w: &NoiseWindow, p: &HolderParams, j: usize) -> Result<f64> {
    weighted_norm(&w.component(j), p)
}

/// Hölder seminorm `max |x(t) - x(s)| / |t - s|^γ` over grid pairs.
pub fn holder_seminorm(path: &SampledPath, gamma: f64) -> Result<f64> {
    weighted_holder_norm(path, gamma, 0.0)
}

pub fn holder_seminorm_component(path: &SampledPath, gamma: f64, j: usize) -> Result<f64> {
    let g = *path.grid();
    let c = SampledPath::scalar(g, path.component(j))?;
    holder_seminorm(&c, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::Grid;

    fn brute(path: &SampledPath, gamma: f64, delta: f64) -> f64 {
        let g = path.grid();
        let mut best = 0.0f64;
        for i in 0..g.len() {
            for j in 0..g.len() {
                if i == j {
                    continue;
                }
                let (t, s) = (g.time(i), g.time(j));
                let num: f64 = path
                    .row(i)
                    .iter()
                    .zip(path.row(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                best = best.max(num / ((t - s).abs().powf(gamma) * (1.0 + t.abs() + s.abs()).powf(delta)));
            }
        }
        best
    }

    #[test]
    fn zero_and_linear_window() {
        let p = HolderParams::new(0.6, 0.25).unwrap();
        let z = NoiseWindow::zeros(1.0, 0.01, 2).unwrap();
        assert_eq!(weighted_norm(&z, &p).unwrap(), 0.0);
        let w = NoiseWindow::from_fn(1.0, 0.01, 1, |s| vec![s]).unwrap();
        let n = weighted_norm(&w, &p).unwrap();
        assert!((n - 2f64.powf(-0.25)).abs() < 1e-12, "{n}");
        assert!((n - brute(&w.to_path(), 0.6, 0.25)).abs() < 1e-14);
        let n3 = weighted_norm(&w.scale(3.7), &p).unwrap();
        assert!((n3 - 3.7 * n).abs() < 1e-12);
    }

    #[test]
    fn seminorm_cases() {
        let g = Grid::forward(1.0, 0.01).unwrap();
        let c = SampledPath::from_scalar_fn(g, |_| 3.0);
        assert_eq!(holder_seminorm(&c, 0.7).unwrap(), 0.0);
        let lin = SampledPath::from_scalar_fn(g, |t| t);
        assert!((holder_seminorm(&lin, 0.7).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_sign_grid_matches_brute_force() {
        let g = Grid::new(-0.5, 0.05, 21).unwrap();
        let p = SampledPath::from_fn(g, 2, |t| vec![(3.0 * t).sin(), t * t]).unwrap();
        let fast = weighted_holder_norm(&p, 0.65, 0.2).unwrap();
        assert!((fast - brute(&p, 0.65, 0.2)).abs() < 1e-13);
    }

    #[test]
    fn single_point_is_rejected() {
        assert!(pair_max(1, 0.0, 0.1, 0.6, 0.0, |_, _| 0.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(HolderParams::new(0.4, 0.2).is_err());
        assert!(HolderParams::new(0.6, 0.5).is_err());
        let p = HolderParams::default_for(0.7).unwrap();
        p.check_hurst(0.7).unwrap();
        assert!(HolderParams::new(0.6, 0.05).unwrap().check_hurst(0.7).is_err());
    }
}
