//! Drift/diffusion pairs and the benchmark model library.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::RngSeed;

/// Coefficients of `dx = f(x) dt + σ(x) dw`. Matrices are row-major `d × d`;
/// column `j` of `σ` multiplies `dw_j`.
pub trait Dynamics: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn drift(&self, x: &[f64], out: &mut [f64]);
    fn drift_jacobian(&self, x: &[f64], out: &mut [f64]);
    fn diffusion(&self, x: &[f64], out: &mut [f64]);
    /// Jacobian of column `col` of `σ`.
    fn diffusion_jacobian(&self, x: &[f64], col: usize, out: &mut [f64]);
}

/// Declared regularity and dissipativity constants (operator norms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub lip_f: f64,
    pub lip_sigma: f64,
    pub bound_sigma: f64,
    pub bound_sigma_inv: f64,
    pub c_diss: f64,
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    name: String,
    dynamics: Arc<dyn Dynamics>,
    constants: ModelConstants,
}

/// `f(x) = A x`, `σ ≡ S`.
#[derive(Debug, Clone)]
pub struct LinearModel {
    d: usize,
    a: Vec<f64>,
    s: Vec<f64>,
}

impl Dynamics for LinearModel {
    fn dim(&self) -> usize {
        self.d
    }
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.d {
            out[i] = (0..self.d).map(|j| self.a[i * self.d + j] * x[j]).sum();
        }
    }
    fn drift_jacobian(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.a);
    }
    fn diffusion(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.s);
    }
    fn diffusion_jacobian(&self, _x: &[f64], _col: usize, out: &mut [f64]) {
        out.fill(0.0);
    }
}

const PLANAR_ROTATION: f64 = 0.5;
const PLANAR_NOISE: f64 = 0.3 / std::f64::consts::SQRT_2;

/// `f(x) = -x + ½(-tanh x₂, tanh x₁)`, `σ(x) = I + c [[tanh x₁, tanh x₂], [-tanh x₂, tanh x₁]]`.
#[derive(Debug, Clone, Copy)]
pub struct PlanarModel;

fn sech2(x: f64) -> f64 {
    let c = x.cosh();
    1.0 / (c * c)
}

impl Dynamics for PlanarModel {
    fn dim(&self) -> usize {
        2
    }
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        out[0] = -x[0] - PLANAR_ROTATION * x[1].tanh();
        out[1] = -x[1] + PLANAR_ROTATION * x[0].tanh();
    }
    fn drift_jacobian(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&[-1.0, -PLANAR_ROTATION * sech2(x[1]), PLANAR_ROTATION * sech2(x[0]), -1.0]);
    }
    fn diffusion(&self, x: &[f64], out: &mut [f64]) {
        let (a, b) = (x[0].tanh(), x[1].tanh());
        let c = PLANAR_NOISE;
        out.copy_from_slice(&[1.0 + c * a, c * b, -c * b, 1.0 + c * a]);
    }
    fn diffusion_jacobian(&self, x: &[f64], col: usize, out: &mut [f64]) {
        let c = PLANAR_NOISE;
        let (s1, s2) = (c * sech2(x[0]), c * sech2(x[1]));
        match col {
            0 => out.copy_from_slice(&[s1, 0.0, 0.0, -s2]),
            _ => out.copy_from_slice(&[0.0, s2, s1, 0.0]),
        }
    }
}

/// `f(x) = x (1 - 4 tanh(|x|²/2))`, `σ ≡ s I`: unstable origin, attracting shell, linear pull far out.
#[derive(Debug, Clone, Copy)]
pub struct DoubleWellModel {
    pub d: usize,
    pub noise: f64,
}

impl Dynamics for DoubleWellModel {
    fn dim(&self) -> usize {
        self.d
    }
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        let q: f64 = x.iter().map(|v| v * v).sum();
        let c = 1.0 - 4.0 * (0.5 * q).tanh();
        for (o, v) in out.iter_mut().zip(x) {
            *o = c * v;
        }
    }
    fn drift_jacobian(&self, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        let q: f64 = x.iter().map(|v| v * v).sum();
        let c = 1.0 - 4.0 * (0.5 * q).tanh();
        let e = 4.0 * sech2(0.5 * q);
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = if i == j { c } else { 0.0 } - e * x[i] * x[j];
            }
        }
    }
    fn diffusion(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for i in 0..self.d {
            out[i * self.d + i] = self.noise;
        }
    }
    fn diffusion_jacobian(&self, _x: &[f64], _col: usize, out: &mut [f64]) {
        out.fill(0.0);
    }
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

fn op_norm(d: usize, m: &[f64]) -> f64 {
    let mat = DMatrix::from_row_slice(d, d, m);
    mat.singular_values().max()
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, dynamics: Arc<dyn Dynamics>, constants: ModelConstants) -> Self {
        Self { name: name.into(), dynamics, constants }
    }

    /// Model (a): `f(x) = -x`, `σ = 1`.
    pub fn scalar() -> Self {
        Self::linear("scalar", vec![-1.0], vec![1.0]).expect("valid scalar model")
    }

    /// Model (b): planar contraction with bounded rotation and multiplicative noise.
    pub fn planar() -> Self {
        let c = PLANAR_NOISE;
        Self::new(
            "planar",
            Arc::new(PlanarModel),
            ModelConstants {
                lip_f: 1.0 + PLANAR_ROTATION,
                lip_sigma: c,
                bound_sigma: 1.0 + c * std::f64::consts::SQRT_2,
                bound_sigma_inv: 1.0 / (1.0 - c * std::f64::consts::SQRT_2),
                c_diss: 0.5,
            },
        )
    }

    /// Model (c): double-well drift with additive noise of size `noise`.
    pub fn double_well(d: usize, noise: f64) -> Result<Self> {
        if d == 0 || !(noise > 0.0) {
            return Err(invalid("double-well model needs d >= 1 and positive noise"));
        }
        Ok(Self::new(
            "double-well",
            Arc::new(DoubleWellModel { d, noise }),
            ModelConstants { lip_f: 7.0, lip_sigma: 0.0, bound_sigma: noise, bound_sigma_inv: 1.0 / noise, c_diss: 1.0 },
        ))
    }

    /// `f(x) = A x`, `σ ≡ S` (row-major `d × d`).
    pub fn linear(name: &str, a: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        let d = (a.len() as f64).sqrt() as usize;
        if d == 0 || d * d != a.len() || s.len() != a.len() {
            return Err(invalid("linear model needs square matrices of equal size"));
        }
        let lip_f = op_norm(d, &a);
        let bound_sigma = op_norm(d, &s);
        let inv = DMatrix::from_row_slice(d, d, &s).try_inverse();
        let bound_sigma_inv = inv.map(|m| m.singular_values().max()).unwrap_or(f64::INFINITY);
        // <Ax, x> <= λ_max(sym A) |x|²; with λ_max < 0 take C = -λ_max.
        let sym = {
            let m = DMatrix::from_row_slice(d, d, &a);
            (&m + m.transpose()) * 0.5
        };
        let lam = sym.symmetric_eigenvalues().max();
        let c_diss = if lam < 0.0 { -lam } else { f64::INFINITY };
        Ok(Self::new(name, Arc::new(LinearModel { d, a, s }), ModelConstants {
            lip_f,
            lip_sigma: 0.0,
            bound_sigma,
            bound_sigma_inv,
            c_diss,
        }))
    }

    /// `f(x) = -x`, `σ ≡ 0`.
    pub fn contraction(d: usize) -> Self {
        let mut a = identity(d);
        a.iter_mut().for_each(|v| *v = -*v);
        Self::linear("contraction", a, vec![0.0; d * d]).expect("valid contraction model")
    }

    pub fn by_name(name: &str, dim: Option<usize>) -> Result<Self> {
        match name {
            "scalar" => Ok(Self::scalar()),
            "planar" => Ok(Self::planar()),
            "double-well" => Self::double_well(dim.unwrap_or(1), 0.5),
            "contraction" => Ok(Self::contraction(dim.unwrap_or(1))),
            other => Err(invalid(format!("unknown model `{other}` (expected scalar, planar, double-well, contraction)"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dynamics.dim()
    }

    pub fn dynamics(&self) -> &dyn Dynamics {
        self.dynamics.as_ref()
    }

    pub fn constants(&self) -> &ModelConstants {
        &self.constants
    }

    pub fn drift(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.dynamics.drift(x, &mut out);
        out
    }

    pub fn diffusion(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d * d];
        self.dynamics.diffusion(x, &mut out);
        out
    }

    /// `σ(x)^{-1}` or `None` if singular.
    pub fn diffusion_inverse(&self, x: &[f64]) -> Option<Vec<f64>> {
        let d = self.dim();
        let m = DMatrix::from_row_slice(d, d, &self.diffusion(x));
        let inv = m.try_inverse()?;
        Some(inv.transpose().as_slice().to_vec())
    }

    /// Probes (H1)–(H3) at `probes` random points within `radius` (plus the origin).
    pub fn check_hypotheses(&self, probes: usize, radius: f64, seed: RngSeed) -> HypothesisReport {
        let d = self.dim();
        let c = self.constants;
        let mut rng = seed.rng();
        let mut report = HypothesisReport::default();
        let mut buf = vec![0.0; d * d];
        let slack = 1.0 + 1e-9;
        for p in 0..=probes {
            let x: Vec<f64> = if p == 0 {
                vec![0.0; d]
            } else {
                let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
                let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
                dir.iter().map(|v| v * r / n).collect()
            };
            let sigma = self.diffusion(&x);
            report.max_sigma = report.max_sigma.max(op_norm(d, &sigma));
            self.dynamics.drift_jacobian(&x, &mut buf);
            report.max_drift_jacobian = report.max_drift_jacobian.max(op_norm(d, &buf));
            for col in 0..d {
                self.dynamics.diffusion_jacobian(&x, col, &mut buf);
                report.max_sigma_jacobian = report.max_sigma_jacobian.max(op_norm(d, &buf));
            }
            match DMatrix::from_row_slice(d, d, &sigma).try_inverse() {
                Some(inv) => report.max_sigma_inv = report.max_sigma_inv.max(inv.singular_values().max()),
                None => report.max_sigma_inv = f64::INFINITY,
            }
            let f = self.drift(&x);
            let q: f64 = x.iter().map(|v| v * v).sum();
            let inner: f64 = f.iter().zip(&x).map(|(a, b)| a * b).sum();
            let excess = inner - c.c_diss * (1.0 - q);
            report.max_dissipativity_excess = report.max_dissipativity_excess.max(excess);
        }
        report.h1 = report.max_sigma <= c.bound_sigma * slack
            && report.max_drift_jacobian <= c.lip_f * slack
            && report.max_sigma_jacobian <= c.lip_sigma * slack + 1e-12;
        report.h2 = report.max_sigma_inv.is_finite() && report.max_sigma_inv <= c.bound_sigma_inv * slack;
        report.h3 = c.c_diss.is_finite() && report.max_dissipativity_excess <= 1e-9;
        report.probes = probes + 1;
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub probes: usize,
    pub max_sigma: f64,
    pub max_drift_jacobian: f64,
    pub max_sigma_jacobian: f64,
    pub max_sigma_inv: f64,
    /// `max <f(x), x> - C (1 - |x|²)`; must be `<= 0`.
    pub max_dissipativity_excess: f64,
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
}

impl HypothesisReport {
    pub fn all(&self) -> bool {
        self.h1 && self.h2 && self.h3
    }
}
