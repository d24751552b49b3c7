mod common;

use common::*;
use fbm_ergodics::fbm::FbmSampler;
use fbm_ergodics::sde::{noise_derivative, solve_sde_with, young_integral, SolveOptions};
use fbm_ergodics::{FbmMethod, Grid, ModelSpec, RngSeed, SampledPath};

fn fbm_path(n_log2: i32, dim: usize, seed: u64) -> SampledPath {
    let grid = Grid::forward(1.0, 0.5f64.powi(n_log2)).unwrap();
    FbmSampler::with_method(grid, 0.7, FbmMethod::Circulant).unwrap().sample(dim, RngSeed::new(seed)).unwrap().path
}

#[test]
fn scalar_model_matches_variation_of_constants() {
    let model = ModelSpec::scalar();
    let dt = 0.5f64.powi(12);
    let (mut err, mut norm) = (0.0, 0.0);
    for p in 0..8 {
        let b = fbm_path(12, 1, 100 + p);
        let exact = ou_voc(2.0, &b.component(0), dt);
        let got = solve_sde_with(&model, &[2.0], &b, SolveOptions::default()).unwrap().endpoint()[0];
        err += (got - exact).powi(2);
        norm += exact * exact;
    }
    let rel = (err / norm).sqrt();
    assert!(rel <= 1e-3, "relative RMS error {rel}");
}

#[test]
fn young_integral_of_path_against_itself_converges() {
    // ∫_0^1 B dB = B(1)^2 / 2 for H > 1/2
    let fine = fbm_path(14, 1, 7);
    let exact = 0.5 * fine.last()[0].powi(2);
    let mut logs = Vec::new();
    let mut errs = Vec::new();
    for m in 6..=14 {
        let b = fine.subsample(1 << (14 - m)).unwrap();
        let yi = young_integral(&b, &b).unwrap();
        if m == 14 {
            assert!(yi.admissible, "exponent sum {}", yi.exponent_sum);
        }
        logs.push((0.5f64.powi(m)).ln());
        errs.push((yi.path.last()[0] - exact).abs().ln());
    }
    let rate = slope(&logs, &errs);
    assert!(rate >= 2.0 * 0.7 - 1.0 - 0.1, "rate {rate}");
}

#[test]
fn jacobian_matches_finite_differences() {
    let model = ModelSpec::planar();
    let driver = fbm_path(11, 2, 21);
    let x0 = [0.8, -0.3];
    let opts = SolveOptions { jacobian: true, ..Default::default() };
    let traj = solve_sde_with(&model, &x0, &driver, opts).unwrap();
    let j = traj.jacobian.unwrap().last().to_vec();
    let eps = 1e-5;
    for e in 0..2 {
        let (mut xp, mut xm) = (x0, x0);
        xp[e] += eps;
        xm[e] -= eps;
        let a = solve_sde_with(&model, &xp, &driver, SolveOptions::default()).unwrap();
        let b = solve_sde_with(&model, &xm, &driver, SolveOptions::default()).unwrap();
        for i in 0..2 {
            let fd = (a.endpoint()[i] - b.endpoint()[i]) / (2.0 * eps);
            let scale = j.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((fd - j[i * 2 + e]).abs() <= 1e-6 * scale, "J[{i}{e}] {} vs {fd}", j[i * 2 + e]);
        }
    }
}

#[test]
fn inverse_flow_matches_matrix_inverse() {
    let model = ModelSpec::double_well(2, 0.5).unwrap();
    let dt = 0.5f64.powi(12);
    let driver = fbm_path(12, 2, 22);
    let opts = SolveOptions { jacobian: true, inverse: true, error_estimate: false };
    let traj = solve_sde_with(&model, &[0.3, -0.2], &driver, opts).unwrap();
    let j = traj.jacobian.unwrap().last().to_vec();
    let inv = traj.jacobian_inv.unwrap().last().to_vec();
    let det = j[0] * j[3] - j[1] * j[2];
    let direct = [j[3] / det, -j[1] / det, -j[2] / det, j[0] / det];
    let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 0..4 {
        assert!((inv[k] - direct[k]).abs() <= 10.0 * dt * scale, "entry {k}: {} vs {}", inv[k], direct[k]);
    }
}

#[test]
fn noise_derivative_matches_one_sided_difference() {
    let model = ModelSpec::double_well(2, 0.5).unwrap();
    let driver = fbm_path(11, 2, 23);
    let x0 = [0.3, -0.2];
    let opts = SolveOptions { jacobian: true, ..Default::default() };
    let traj = solve_sde_with(&model, &x0, &driver, opts).unwrap();
    let v = SampledPath::from_fn(*driver.grid(), 2, |t| vec![t * (1.0 - t), (2.0 * t).cos() - 1.0]).unwrap();
    let kv = noise_derivative(&model, &traj, &v).unwrap();
    let eps = 1e-5;
    let bumped = solve_sde_with(&model, &x0, &driver.combine(1.0, &v, eps).unwrap(), SolveOptions::default()).unwrap();
    let fd: Vec<f64> = (0..2).map(|i| (bumped.endpoint()[i] - traj.endpoint()[i]) / eps).collect();
    let k = kv.path.last();
    let num = ((fd[0] - k[0]).powi(2) + (fd[1] - k[1]).powi(2)).sqrt();
    let den = (k[0] * k[0] + k[1] * k[1]).sqrt();
    assert!(num <= 1e-3 * den, "{fd:?} vs {k:?}");
}
