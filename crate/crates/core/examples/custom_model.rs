//! A user-defined drift/diffusion pair: probe the standing hypotheses, then
//! solve it on an fBm path.
//!
//! `cargo run --release --example custom_model`

use std::sync::Arc;

use fbm_ergodics::fbm::FbmSampler;
use fbm_ergodics::sde::{solve_sde, Dynamics, ModelConstants};
use fbm_ergodics::{Grid, ModelSpec, RngSeed};

/// `dx = -(x + x^3) dt + (1 + 0.2 sin x) dw`.
#[derive(Debug)]
struct Cubic;

impl Dynamics for Cubic {
    fn dim(&self) -> usize {
        1
    }
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        out[0] = -x[0] - x[0].powi(3);
    }
    fn drift_jacobian(&self, x: &[f64], out: &mut [f64]) {
        out[0] = -1.0 - 3.0 * x[0] * x[0];
    }
    fn diffusion(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 1.0 + 0.2 * x[0].sin();
    }
    fn diffusion_jacobian(&self, x: &[f64], _col: usize, out: &mut [f64]) {
        out[0] = 0.2 * x[0].cos();
    }
}

fn main() -> fbm_ergodics::Result<()> {
    let constants = ModelConstants { lip_f: f64::INFINITY, lip_sigma: 0.2, bound_sigma: 1.2, bound_sigma_inv: 1.25, c_diss: 1.0 };
    let model = ModelSpec::new("cubic", Arc::new(Cubic), constants);
    let report = model.check_hypotheses(200, 3.0, RngSeed::new(2));
    println!("{report:#?}");

    let driver = FbmSampler::new(Grid::forward(5.0, 1.0 / 512.0)?, 0.7)?.sample(1, RngSeed::new(3))?.path;
    let traj = solve_sde(&model, &[2.0], &driver)?;
    for k in (0..traj.state.len()).step_by(512) {
        println!("t = {:.1}: x = {:+.4}", k as f64 / 512.0, traj.state.get(k, 0));
    }
    Ok(())
}
