//! Decay of `D^{H+1/2} A h` for a past path that is constant far back.
//!
//! `cargo run --release --example decay_envelope`

use fbm_ergodics::frac::{decay_da, DecayOptions};
use fbm_ergodics::{HurstContext, NoiseWindow};

fn main() -> fbm_ergodics::Result<()> {
    let ctx = HurstContext::new(0.7)?;
    let ramp = |s: f64| {
        let u = (s - 1.0).clamp(0.0, 1.0);
        u * u * (3.0 - 2.0 * u)
    };
    let w = NoiseWindow::from_fn(4.0, 1.0 / 256.0, 1, |t| vec![ramp(-t)])?;
    let r = decay_da(&w, &ctx, &DecayOptions { t_min: 1e-2, t_max: 1e3, points: 11 })?;
    println!("envelope constant C = {:.4}", r.envelope_constant);
    for ((t, v), e) in r.times.iter().zip(&r.values).zip(&r.envelope) {
        println!("t = {t:>9.3}: |D A h| = {:.3e}, C min(1/t, t^(1/2-H)) = {e:.3e}", v.abs());
    }
    Ok(())
}
