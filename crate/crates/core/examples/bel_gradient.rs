//! Bismut-Elworthy-Li estimate of `d/dx E phi(x(T))` against finite differences
//! with common noise.
//!
//! `cargo run --release --example bel_gradient`

use fbm_ergodics::ergodics::{bel_gradient, BelOptions, Observable};
use fbm_ergodics::fbm::{stationary_window, ConditionalSampler};
use fbm_ergodics::sde::solve_sde;
use fbm_ergodics::{Grid, HurstContext, ModelSpec, RngSeed};

fn main() -> fbm_ergodics::Result<()> {
    let ctx = HurstContext::new(0.7)?;
    let model = ModelSpec::scalar();
    let w = stationary_window(16.0, 1.0 / 64.0, 0.7, 1, &mut RngSeed::new(1).rng())?;
    let opts = BelOptions { dt: 1.0 / 64.0, horizon: 2.0, ..Default::default() };
    let phi = Observable::EndpointClipped { component: 0, bound: 1.0 };
    let x = -0.25;
    let n = 20_000;

    let r = bel_gradient(&model, &phi, &[x], &[1.0], &w, n, &ctx, RngSeed::new(2), &opts)?;
    println!("BEL: {:.5} +- {:.5} ({} rejected)", r.summary.estimate[0], r.summary.stderr[0], r.rejected);

    let sampler = ConditionalSampler::for_window(&ctx, &w, Grid::forward(opts.horizon, opts.dt)?)?;
    let step = 1e-3;
    let mut sum = 0.0;
    for i in 0..n {
        let c = sampler.continue_window(&w, RngSeed::new(3).substream(i as u64))?;
        let end = |x0: f64| solve_sde(&model, &[x0], &c.path).map(|t| phi.evaluate(t.endpoint()));
        sum += (end(x + step)? - end(x - step)?) / (2.0 * step);
    }
    println!("finite differences: {:.5}", sum / n as f64);
    Ok(())
}
