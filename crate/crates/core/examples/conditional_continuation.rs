//! Continues a stationary past window, steps the noise semigroup and undoes the
//! step with the shift.
//!
//! `cargo run --release --example conditional_continuation`

use fbm_ergodics::fbm::{conditional_continue, stationary_window, NoiseSemigroup};
use fbm_ergodics::paths::shift_theta;
use fbm_ergodics::{Grid, HurstContext, RngSeed};

fn main() -> fbm_ergodics::Result<()> {
    let h = 0.7;
    let ctx = HurstContext::new(h)?;
    let (dt, past) = (1.0 / 16.0, 64.0);
    let w = stationary_window(past, dt, h, 1, &mut RngSeed::new(3).rng())?;

    let c = conditional_continue(&w, &Grid::forward(2.0, dt)?, &ctx, RngSeed::new(4))?;
    for k in [0, 8, 16, 32] {
        println!("t = {:5.3}: mean {:+.4}, path {:+.4}", k as f64 * dt, c.mean.get(k, 0), c.path.get(k, 0));
    }

    let sg = NoiseSemigroup::new(&ctx, dt, past, 1.0)?;
    let (stepped, _) = sg.step(&w, &mut RngSeed::new(5).rng())?;
    println!("theta_1 of P_1 w equals w: {}", shift_theta(&stepped, 1.0)? == w.trim(past - 1.0)?);
    Ok(())
}
