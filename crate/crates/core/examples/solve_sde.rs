//! Euler-Young solve of a double-well system with its Jacobian, inverse
//! Jacobian and the derivative in a driver direction.
//!
//! `cargo run --release --example solve_sde`

use fbm_ergodics::fbm::{stationary_window, FbmSampler};
use fbm_ergodics::sde::{cocycle_defect, noise_derivative, solve_sde, solve_sde_with, SolveOptions};
use fbm_ergodics::{Grid, ModelSpec, RngSeed, SampledPath};

fn main() -> fbm_ergodics::Result<()> {
    let model = ModelSpec::double_well(2, 0.5)?;
    let grid = Grid::forward(1.0, 1.0 / 4096.0)?;
    let driver = FbmSampler::new(grid, 0.7)?.sample(2, RngSeed::new(9))?.path;
    let x0 = [-0.6, 0.4];

    let traj = solve_sde_with(&model, &x0, &driver, SolveOptions { jacobian: true, inverse: true, error_estimate: true })?;
    println!("x(1) = {:?}", traj.endpoint());
    if let Some(j) = &traj.jacobian {
        println!("J(1) = {:?}", j.last());
    }

    let v = SampledPath::from_fn(grid, 2, |t| vec![t * t, (5.0 * t).sin()])?;
    let nd = noise_derivative(&model, &traj, &v)?;
    let eps = 1e-6;
    let up = solve_sde(&model, &x0, &driver.combine(1.0, &v, eps)?)?;
    let fd: Vec<f64> = up.endpoint().iter().zip(traj.endpoint()).map(|(a, b)| (a - b) / eps).collect();
    println!("K^v(1) = {:?}, one-sided difference {fd:?}", nd.path.last());

    let w = stationary_window(2.0, 1.0 / 4096.0, 0.7, 2, &mut RngSeed::new(8).rng())?;
    for m in [4, 6, 8] {
        let d = cocycle_defect(&model, &x0, &w, 1500.0 / 4096.0, 2500.0 / 4096.0, Some(0.5f64.powi(m)))?;
        println!("cocycle defect at h = 2^-{m}: {d:.3e}");
    }
    Ok(())
}
