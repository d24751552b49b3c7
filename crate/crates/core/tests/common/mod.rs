//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's numerical code: quadrature is an
//! adaptive Gauss-Kronrod rule written from scratch, and closed forms are
//! spelled out directly.

#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate and the gap to the embedded 7-point Gauss rule.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let (v, err) = gk15(f, a, b);
    if err <= tol.max(1e-15 * whole.abs()) || depth == 0 || (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
        return v;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, whole, 0.5 * tol, depth - 1) + adapt(f, m, b, whole, 0.5 * tol, depth - 1)
}

/// `∫_a^b f` to absolute tolerance `tol` (integrable endpoint singularities allowed).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let whole = gk15(&f, a, b).0;
    adapt(&f, a, b, whole, tol, 48)
}

/// `∫_a^∞ f` through `s = a + x/(1-x)`.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, tol: f64) -> f64 {
    integrate(
        |x| {
            let om = 1.0 - x;
            if om <= 0.0 {
                return 0.0;
            }
            f(a + x / om) / (om * om)
        },
        0.0,
        1.0,
        tol,
    )
}

/// `g(x) = x^{H-1/2} + (H-3/2) x ∫_0^1 (u+x)^{H-5/2} (1-u)^{-(H-1/2)} du`.
///
/// `1 - u = v^{1/(3/2-H)}` removes the endpoint singularity at `u = 1`.
pub fn kernel_g_defining(x: f64, h: f64) -> f64 {
    let e = 1.5 - h;
    let inner = integrate(
        |v| {
            let one_minus_u = v.powf(1.0 / e);
            let u = 1.0 - one_minus_u;
            (u + x).powf(h - 2.5) / e
        },
        0.0,
        1.0,
        1e-14,
    );
    x.powf(h - 0.5) + (h - 1.5) * x * inner
}

pub fn fbm_cov(t: f64, s: f64, h: f64) -> f64 {
    0.5 * (t.abs().powf(2.0 * h) + s.abs().powf(2.0 * h) - (t - s).abs().powf(2.0 * h))
}

/// `β_H` of the conditional-mean operator, `-sin(π(H - 1/2))/π`.
pub fn beta_h(h: f64) -> f64 {
    -(std::f64::consts::PI * (h - 0.5)).sin() / std::f64::consts::PI
}

/// Fresh-noise scale `κ_H = α_H Γ(H+1/2)` with `α_H` normalising `Var B_H(1) = 1`
/// in the moving-average representation; computed from the closed form of the
/// kernel's squared norm.
pub fn fresh_scale(h: f64) -> f64 {
    // ∫_0^∞ ((1+r)^{H-1/2} - r^{H-1/2})² dr + 1/(2H) = Γ(H+1/2)² / (Γ(2H+1) sin πH)
    (gamma(2.0 * h + 1.0) * (std::f64::consts::PI * h).sin()).sqrt()
}

/// Exact endpoint of `dx = -x dt + dB` for the piecewise-linear interpolant of
/// `b` sampled with step `dt` from `t = 0`.
pub fn ou_voc(x0: f64, b: &[f64], dt: f64) -> f64 {
    let n = b.len() - 1;
    let t_end = n as f64 * dt;
    let mut x = x0 * (-t_end).exp();
    for k in 0..n {
        let slope = (b[k + 1] - b[k]) / dt;
        let (t0, t1) = (k as f64 * dt, (k + 1) as f64 * dt);
        x += slope * ((t1 - t_end).exp() - (t0 - t_end).exp());
    }
    x
}

/// Stationary variance of `dx = -x dt + dB_H`:
/// `H(2H-1) ∫_0^∞ ∫_0^∞ e^{-u-v} |u-v|^{2H-2} du dv`.
pub fn fou_stationary_variance(h: f64) -> f64 {
    let p = 2.0 * h - 2.0;
    let inner = |u: f64| -> f64 {
        // split at v = u and remove the singularity with v = u ∓ w^{1/(p+1)}
        let q = 1.0 / (p + 1.0);
        let below = integrate(|w| (-(u - w.powf(q))).exp() * q * w.powf(q - 1.0) * w.powf(q * p), 0.0, u.powf(p + 1.0), 1e-13);
        let above = integrate_to_infinity(
            |w| {
                let d = w.powf(q);
                (-(u + d)).exp() * q * w.powf(q - 1.0) * d.powf(p)
            },
            0.0,
            1e-13,
        );
        below + above
    };
    h * (2.0 * h - 1.0) * integrate_to_infinity(|u| (-u).exp() * inner(u), 0.0, 1e-11)
}

/// Conditional variance of `x_T` for `dx = -x dt + dX`, where `X` is the fresh
/// part `κ_H/Γ(H+1/2) ∫_0^t (t-r)^{H-1/2} dW(r)` of the continuation:
/// `x_T = ∫_0^T e^{-(T-t)} dX(t)`, so the kernel against `dW(r)` is
/// `c ∫_r^T e^{-(T-t)} κ (t-r)^{κ-1} dt` with `κ = H-1/2`.
pub fn ou_conditional_variance(h: f64, horizon: f64) -> f64 {
    let k = h - 0.5;
    let c = fresh_scale(h) / gamma(h + 0.5);
    let kernel = |r: f64| -> f64 {
        let l = horizon - r;
        if l <= 0.0 {
            return 0.0;
        }
        // ∫_0^L e^{-(L-a)} κ a^{κ-1} da with a = z^{1/κ}: ∫_0^{L^κ} e^{-(L - z^{1/κ})} dz
        c * integrate(|z| (-(l - z.powf(1.0 / k))).exp(), 0.0, l.powf(k), 1e-14)
    };
    integrate(|r| kernel(r).powi(2), 0.0, horizon, 1e-12)
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

/// Sup over all grid pairs of `|w(t) - w(s)| / (|t-s|^γ (1+|t|+|s|)^δ)` by brute force.
pub fn brute_force_holder(times: &[f64], values: &[f64], gamma_: f64, delta: f64) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..times.len() {
        for j in 0..i {
            let (t, s) = (times[i], times[j]);
            let r = (values[i] - values[j]).abs() / ((t - s).abs().powf(gamma_) * (1.0 + t.abs() + s.abs()).powf(delta));
            best = best.max(r);
        }
    }
    best
}

/// Mean and standard error.
pub fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
