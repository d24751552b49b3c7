//! Builds a control steering the planar model between two points and replays it.
//!
//! `cargo run --release --example steering`

use fbm_ergodics::ergodics::steer_control;
use fbm_ergodics::sde::solve_sde;
use fbm_ergodics::ModelSpec;

fn main() -> fbm_ergodics::Result<()> {
    let model = ModelSpec::planar();
    let (x0, x1) = ([1.5, -0.5], [-1.0, 1.2]);
    let r = steer_control(&model, &x0, &x1, 1.0, 1e-3)?;
    let replay = solve_sde(&model, &x0, &r.control)?;
    println!("target {x1:?}, replayed endpoint {:?}, residual {:.2e}", replay.endpoint(), r.residual);
    for k in (0..r.control.len()).step_by(250) {
        println!("t = {:.2}: u = {:?}", k as f64 * 1e-3, r.control.row(k));
    }
    Ok(())
}
