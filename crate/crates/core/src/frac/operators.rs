//! Riemann–Liouville integral and derivative on uniform grids.

use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};
use crate::paths::SampledPath;

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("fractional order must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Product-trapezoid weights for `I^alpha`, exact on piecewise-linear data.
#[derive(Debug, Clone)]
pub struct FracIntegrator {
    alpha: f64,
    dt: f64,
    scale: f64,
    pow: Vec<f64>,
}

impl FracIntegrator {
    pub fn new(alpha: f64, dt: f64, n: usize) -> Result<Self> {
        check_order(alpha)?;
        let pow = (0..=n).map(|j| (j as f64).powf(alpha + 1.0)).collect();
        Ok(Self { alpha, dt, scale: dt.powf(alpha) / gamma(alpha + 2.0), pow })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Interior weight for lag `j >= 1`.
    fn interior(&self, j: usize) -> f64 {
        self.pow[j + 1] - 2.0 * self.pow[j] + self.pow[j - 1]
    }

    /// Weight of `f_0` at row `n >= 1`.
    fn first(&self, n: usize) -> f64 {
        let nf = n as f64;
        self.pow[n - 1] - (nf - 1.0 - self.alpha) * nf.powf(self.alpha)
    }

    /// `I^alpha f` at row `n`.
    pub fn at(&self, f: &[f64], n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let mut acc = self.first(n) * f[0] + f[n];
        for k in 1..n {
            acc += self.interior(n - k) * f[k];
        }
        self.scale * acc
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert!(f.len() <= self.pow.len(), "integrator built for a shorter grid");
        (0..f.len()).map(|n| self.at(f, n)).collect()
    }

    /// Solves `I^alpha f = g` for `f` with `f_0 = 0`, the exact inverse of
    /// [`FracIntegrator::apply`] on paths starting at zero.
    pub fn invert(&self, g: &[f64]) -> Vec<f64> {
        assert!(g.len() <= self.pow.len(), "integrator built for a shorter grid");
        let mut f = vec![0.0; g.len()];
        for n in 1..g.len() {
            let known: f64 = (1..n).map(|k| self.interior(n - k) * f[k]).sum();
            f[n] = g[n] / self.scale - known;
        }
        f
    }

    /// Same operator written as `∫(t - s)^alpha dB(s) / Γ(alpha + 1)` over the
    /// increments of a piecewise-linear `B` with `B(0) = 0`.
    pub fn apply_increment_form(&self, b: &[f64]) -> Vec<f64> {
        let c = self.scale;
        (0..b.len())
            .map(|n| {
                (0..n)
                    .map(|k| (b[k + 1] - b[k]) * (self.pow[n - k] - self.pow[n - k - 1]))
                    .sum::<f64>()
                    * c
            })
            .collect()
    }
}

/// L1 stencil for `D^alpha`: the exact derivative of order `alpha` of the
/// piecewise-linear interpolant, i.e. `D^alpha = d/dt I^{1 - alpha}` on that
/// interpolant.
#[derive(Debug, Clone)]
pub struct FracDifferentiator {
    alpha: f64,
    dt: f64,
    scale: f64,
    diff: Vec<f64>,
}

impl FracDifferentiator {
    pub fn new(alpha: f64, dt: f64, n: usize) -> Result<Self> {
        check_order(alpha)?;
        let e = 1.0 - alpha;
        let diff = (0..n.max(1)).map(|j| ((j + 1) as f64).powf(e) - (j as f64).powf(e)).collect();
        Ok(Self { alpha, dt, scale: dt.powf(-alpha) / gamma(2.0 - alpha), diff })
    }

    /// Coefficient `c` of the `c t^alpha` part of `f - f(0)`, from the fit
    /// `c t^alpha + b t` through rows 1 and 2.
    fn singular_part(&self, f: &[f64]) -> f64 {
        if f.len() < 3 {
            return 0.0;
        }
        let (t1, t2) = (self.dt, 2.0 * self.dt);
        let (g1, g2) = (f[1] - f[0], f[2] - f[0]);
        let det = t1.powf(self.alpha) * t2 - t2.powf(self.alpha) * t1;
        (g1 * t2 - g2 * t1) / det
    }

    /// `D^alpha f` at row `n`.
    ///
    /// A `c t^alpha` term (what `I^alpha` makes of a nonzero value at `0`) is
    /// fitted on the first rows and differentiated exactly; the L1 stencil
    /// acts on the remainder. Row 0 is reported as `0` when `f(0) != 0`, the
    /// boundary term `f(0) t^{-alpha}` being singular there.
    pub fn at(&self, f: &[f64], n: usize) -> f64 {
        self.at_with(f, n, self.singular_part(f))
    }

    fn at_with(&self, f: &[f64], n: usize, c: f64) -> f64 {
        let exact = c * gamma(1.0 + self.alpha);
        if n == 0 {
            return if f[0] != 0.0 { 0.0 } else { exact };
        }
        let pw = |k: usize| c * (k as f64 * self.dt).powf(self.alpha);
        let mut acc = 0.0;
        for k in 0..n {
            acc += (f[k + 1] - f[k] - (pw(k + 1) - pw(k))) * self.diff[n - k - 1];
        }
        let boundary = if f[0] != 0.0 {
            f[0] * (n as f64 * self.dt).powf(-self.alpha) / gamma(1.0 - self.alpha)
        } else {
            0.0
        };
        boundary + exact + self.scale * acc
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert!(f.len() <= self.diff.len() + 1, "differentiator built for a shorter grid");
        let c = self.singular_part(f);
        (0..f.len()).map(|n| self.at_with(f, n, c)).collect()
    }
}

fn per_component(f: &SampledPath, op: impl Fn(&[f64]) -> Vec<f64>) -> Result<SampledPath> {
    let g = *f.grid();
    if g.t0() != 0.0 {
        return Err(invalid("fractional operators act on paths starting at t = 0"));
    }
    let comps: Vec<Vec<f64>> = (0..f.dim()).map(|j| op(&f.component(j))).collect();
    SampledPath::from_components(g, &comps)
}

/// `I^alpha f(t) = Γ(alpha)^{-1} ∫_0^t (t - s)^{alpha - 1} f(s) ds` on the grid of `f`.
pub fn frac_integral(f: &SampledPath, alpha: f64) -> Result<SampledPath> {
    let op = FracIntegrator::new(alpha, f.grid().dt(), f.len())?;
    per_component(f, |c| op.apply(c))
}

/// `D^alpha f(t) = Γ(1 - alpha)^{-1} d/dt ∫_0^t (t - s)^{-alpha} f(s) ds` on the grid of `f`.
pub fn frac_derivative(f: &SampledPath, alpha: f64) -> Result<SampledPath> {
    let op = FracDifferentiator::new(alpha, f.grid().dt(), f.len())?;
    per_component(f, |c| op.apply(c))
}
