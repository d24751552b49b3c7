//! Time averages of one chain, and the two-start uniqueness diagnostic.
//!
//! `cargo run --release --example stationary`

use fbm_ergodics::ergodics::{stationary_estimate, uniqueness_diagnostic, ChainOptions};
use fbm_ergodics::{HurstContext, ModelSpec, RngSeed};

fn main() -> fbm_ergodics::Result<()> {
    let ctx = HurstContext::new(0.7)?;
    let model = ModelSpec::planar();
    let opts = ChainOptions::default();

    let r = stationary_estimate(&model, &[1.0, 0.0], 20.0, 2000.0, &ctx, RngSeed::new(11), &opts)?;
    for m in &r.moments {
        println!("E|x|^{} = {:.4} +- {:.4}", m.p, m.value, m.stderr);
    }

    let u = uniqueness_diagnostic(&model, &[10.0, 0.0], &[-10.0, 0.0], 50.0, 100.0, 200, &ctx, RngSeed::new(12), &opts)?;
    println!("KS per component {:?}, critical {:.4}, same law: {}", u.ks, u.critical, u.pass);
    Ok(())
}
