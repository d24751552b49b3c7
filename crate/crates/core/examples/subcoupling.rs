//! Meet of two measures, a subcoupling of the projected noise semigroup and the
//! smoothing operator behind its shift.
//!
//! `cargo run --release --example subcoupling`

use std::sync::Arc;

use fbm_ergodics::ergodics::{meet_measure, smooth_shift_k, subcoupling_build, Ball, GriddedDensity, Reference, SubcouplingOptions};
use fbm_ergodics::fbm::stationary_window;
use fbm_ergodics::paths::weighted_norm;
use fbm_ergodics::{HolderParams, HurstContext, NoiseWindow, RngSeed};

fn main() -> fbm_ergodics::Result<()> {
    let reference = Arc::new(Reference::uniform_1d(-10.0, 11.0, 20_001)?);
    let gauss = |m: f64| move |x: &[f64]| (-(x[0] - m).powi(2) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let a = GriddedDensity::from_fn(reference.clone(), gauss(0.0))?;
    let b = GriddedDensity::from_fn(reference, gauss(1.0))?;
    println!("mass of N(0,1) meet N(1,1): {:.5}", meet_measure(&a, &b)?.mass());

    let ctx = HurstContext::new(0.7)?;
    let opts = SubcouplingOptions::default();
    let w = stationary_window(8.0, 1.0 / 64.0, 0.7, 1, &mut RngSeed::new(16).rng())?;
    let probe = Ball { center: vec![0.0; opts.k], radius: 1.0 };
    let mean = subcoupling_build(&w, &probe, &probe, 1.0, &ctx, &SubcouplingOptions { nodes: 1, ..opts.clone() })?.mean;
    let u = Ball { center: mean.iter().map(|m| m + 0.2).collect(), radius: 0.8 };
    let v = Ball { center: mean.iter().map(|m| m - 0.2).collect(), radius: 0.8 };
    let r = subcoupling_build(&w, &u, &v, 1.0, &ctx, &opts)?;
    println!(
        "masses U {:.4}, V {:.4}, coupling {:.4}, eps {}, marginals dominated {} {}",
        r.mass_u, r.mass_v, r.mass, r.epsilon, r.first_marginal_dominated, r.second_marginal_dominated
    );

    let (s, dt) = (1.0, 1.0 / 1024.0);
    let h0 = NoiseWindow::from_fn(s + dt, dt, 1, |t| vec![(1.0 - (std::f64::consts::PI * t.max(-s) / s).cos()) / 2.0])?;
    let params = HolderParams::default_for(0.7)?;
    for m in 2..=6 {
        let eps = s * 0.5f64.powi(m);
        let k = smooth_shift_k(&h0, s, eps)?;
        println!("eps = s/{}: |K h0 - h0| = {:.4}", 1 << m, weighted_norm(&k.combine(1.0, &h0, -1.0)?, &params)?);
    }
    Ok(())
}
