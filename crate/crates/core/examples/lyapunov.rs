//! Moment contraction `E|x(t)|^p <= C + xi |x0|^p` fitted over an ensemble.
//!
//! `cargo run --release --example lyapunov`

use fbm_ergodics::ergodics::{lyapunov_check, LyapunovOptions};
use fbm_ergodics::{HurstContext, ModelSpec, RngSeed};

fn main() -> fbm_ergodics::Result<()> {
    let ctx = HurstContext::new(0.7)?;
    let x0s = vec![vec![0.0, 1.0], vec![0.0, 10.0], vec![0.0, 100.0]];
    let r = lyapunov_check(&ModelSpec::planar(), 2.0, 1.0, &x0s, 4000, &ctx, RngSeed::new(10), &LyapunovOptions::default())?;
    for row in &r.per_x0 {
        println!("|x0|^p = {:>8.1}: E|x(1)|^p = {:.4} +- {:.4}", row.x0_norm_p, row.moment, row.stderr);
    }
    println!("C = {:.4} +- {:.4}, xi = {:.4} +- {:.4}", r.fitted_c, r.c_stderr, r.fitted_xi, r.xi_stderr);
    Ok(())
}
