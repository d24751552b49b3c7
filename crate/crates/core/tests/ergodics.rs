mod common;

use common::*;
use fbm_ergodics::ergodics::{lyapunov_check, stationary_estimate, ChainOptions, LyapunovOptions, NoiseOptions};
use fbm_ergodics::{HurstContext, ModelSpec, RngSeed};

#[test]
fn fou_lyapunov_factor_is_exponential() {
    let ctx = HurstContext::new(0.7).unwrap();
    let dt = 1.0 / 256.0;
    let opts = LyapunovOptions { noise: NoiseOptions { dt, past_horizon: 8.0 }, ..Default::default() };
    let x0s = vec![vec![0.5], vec![1.0], vec![2.0]];
    let r = lyapunov_check(&ModelSpec::scalar(), 2.0, 1.0, &x0s, 4000, &ctx, RngSeed::new(31), &opts).unwrap();
    let exact = (-2.0f64).exp();
    // Euler contracts by (1 - dt)^{1/dt} per unit time, within 2 dt of e^{-1} in the square
    let tol = 3.0 * r.xi_stderr + 2.0 * dt * exact;
    assert!((r.fitted_xi - exact).abs() <= tol, "{} +- {} vs {exact}", r.fitted_xi, r.xi_stderr);
}

#[test]
fn fou_stationary_variance_matches_quadrature() {
    let ctx = HurstContext::new(0.7).unwrap();
    let opts = ChainOptions { dt: 1.0 / 16.0, ..Default::default() };
    let r = stationary_estimate(&ModelSpec::scalar(), &[0.0], 20.0, 1000.0, &ctx, RngSeed::new(32), &opts).unwrap();
    let (v, se) = r.variance(0, 20);
    let exact = fou_stationary_variance(0.7);
    assert!((v - exact).abs() <= 5.0 * se, "{v} +- {se} vs {exact}");
}

#[test]
fn planar_moments_stable_under_doubling() {
    let ctx = HurstContext::new(0.7).unwrap();
    let opts = ChainOptions::default();
    let model = ModelSpec::planar();
    let short = stationary_estimate(&model, &[1.0, 0.0], 50.0, 16_000.0, &ctx, RngSeed::new(33), &opts).unwrap();
    let long = stationary_estimate(&model, &[1.0, 0.0], 50.0, 32_000.0, &ctx, RngSeed::new(33), &opts).unwrap();
    for (a, b) in short.moments.iter().zip(&long.moments) {
        let drift = (a.value - b.value).abs() / b.value;
        assert!(drift <= 0.1, "p={}: {} vs {}", a.p, a.value, b.value);
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let ctx = HurstContext::new(0.7).unwrap();
    let opts = LyapunovOptions::default();
    let x0s = vec![vec![3.0, 0.0], vec![6.0, 0.0]];
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| lyapunov_check(&ModelSpec::planar(), 2.0, 1.0, &x0s, 200, &ctx, RngSeed::new(34), &opts).unwrap())
    };
    assert_eq!(run(1), run(4));
}
