//! Fractional calculus for the moving-average representation of fBm.
//!
//! The representation used throughout is
//! `B_H(t) = α_H ∫_{-∞}^t [(t - u)_+^{H-1/2} - (-u)_+^{H-1/2}] dW(u)`, normalised
//! so that `Var B_H(1) = 1`. Given the past `w` of a path, the future has mean
//! `A w` and fluctuation `κ_H I^{H-1/2} W` for a fresh Brownian motion `W`, with
//! `κ_H = α_H Γ(H + 1/2)`.

mod decay;
mod kernel;
mod operators;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

pub use decay::{decay_da, DecayOptions, DecayReport};
pub use kernel::{apply_a, kernel_g, kernel_g_closed, kernel_g_detailed, KernelValue, MemoryOperator, MemoryResult};
pub use operators::{frac_derivative, frac_integral, FracDifferentiator, FracIntegrator};

use crate::error::{invalid, Result};
use crate::paths::HolderParams;
use crate::quad::tanh_sinh;

/// Output of [`calibrate_constants`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    #[serde(rename = "H")]
    pub hurst: f64,
    #[serde(rename = "alpha_H")]
    pub alpha: f64,
    #[serde(rename = "beta_H")]
    pub beta: f64,
    pub quadrature_nodes: usize,
    pub est_error: f64,
}

/// `α_H` for any `H ∈ (0, 1)`, fixed by `Var B_H(1) = 1`:
/// `α_H^{-2} = ∫_0^∞ ((1 + s)^{H-1/2} - s^{H-1/2})^2 ds + 1/(2H)`.
///
/// Returns `(α_H, evaluations, error estimate of α_H)`.
pub fn alpha_by_quadrature(hurst: f64) -> Result<(f64, usize, f64)> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(invalid(format!("Hurst parameter must lie in (0, 1), got {hurst}")));
    }
    let k = hurst - 0.5;
    // s in [0, 1]
    let near = tanh_sinh(0.0, 1.0, 1e-13, |s, _, _| {
        let d = (1.0 + s).powf(k) - s.powf(k);
        d * d
    });
    // s = 1/v on [1, ∞): v^{-2k-2} ((1 + v)^k - 1)^2
    let far = tanh_sinh(0.0, 1.0, 1e-13, |v, _, _| {
        let d = (k * v.ln_1p()).exp_m1();
        v.powf(-2.0 * k - 2.0) * d * d
    });
    let total = near.value + far.value + 0.5 / hurst;
    let alpha = total.powf(-0.5);
    let err = 0.5 * alpha * (near.error + far.error) / total;
    Ok((alpha, near.evaluations + far.evaluations, err))
}

/// `α_H = 1/Γ(H + 1/2)`, the Riemann–Liouville normalisation.
pub fn alpha_riemann_liouville(hurst: f64) -> f64 {
    1.0 / gamma(hurst + 0.5)
}

/// `β_H = -(H - 1/2) ρ_H ρ_{1-H} = -sin(π(H - 1/2))/π` with `ρ_H = 1/Γ(H + 1/2)`.
pub fn beta_exact(hurst: f64) -> f64 {
    -(hurst - 0.5) * alpha_riemann_liouville(hurst) * alpha_riemann_liouville(1.0 - hurst)
}

/// Calibrates `α_H` by quadrature and returns it with `β_H`.
pub fn calibrate_constants(hurst: f64) -> Result<Calibration> {
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(invalid(format!("Hurst parameter must lie in (1/2, 1), got {hurst}")));
    }
    let (alpha, n1, e1) = alpha_by_quadrature(hurst)?;
    let (_, n2, _) = alpha_by_quadrature(1.0 - hurst)?;
    Ok(Calibration { hurst, alpha, beta: beta_exact(hurst), quadrature_nodes: n1 + n2, est_error: e1 })
}

/// Hurst parameter together with its Hölder exponents and calibrated constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstContext {
    hurst: f64,
    params: HolderParams,
    alpha: f64,
    alpha_dual: f64,
    beta: f64,
    calibration: Calibration,
}

impl HurstContext {
    pub fn new(hurst: f64) -> Result<Self> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(invalid(format!("Hurst parameter must lie in (1/2, 1), got {hurst}")));
        }
        Self::with_params(hurst, HolderParams::default_for(hurst)?)
    }

    pub fn with_params(hurst: f64, params: HolderParams) -> Result<Self> {
        params.check_hurst(hurst)?;
        let calibration = calibrate_constants(hurst)?;
        let (alpha_dual, _, _) = alpha_by_quadrature(1.0 - hurst)?;
        Ok(Self { hurst, params, alpha: calibration.alpha, alpha_dual, beta: calibration.beta, calibration })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn params(&self) -> &HolderParams {
        &self.params
    }

    /// `α_H` under `Var B_H(1) = 1`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `α_{1-H}` under the same normalisation.
    pub fn alpha_dual(&self) -> f64 {
        self.alpha_dual
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `H - 1/2`, the order of the fractional integral acting on fresh noise.
    pub fn kappa(&self) -> f64 {
        self.hurst - 0.5
    }

    /// `κ_H = α_H Γ(H + 1/2)`, the scale of the fresh-noise part.
    pub fn fresh_scale(&self) -> f64 {
        self.alpha * gamma(self.hurst + 0.5)
    }

    pub fn calibration(&self) -> &Calibration {
        &self.calibration
    }

    pub fn kernel_g(&self, x: f64) -> Result<f64> {
        kernel_g(x, self.hurst)
    }
}

/// `α_H` in closed form, `sqrt(Γ(2H + 1) sin(πH)) / Γ(H + 1/2)`.
pub fn alpha_closed_form(hurst: f64) -> f64 {
    (gamma(2.0 * hurst + 1.0) * (PI * hurst).sin()).sqrt() / gamma(hurst + 0.5)
}
