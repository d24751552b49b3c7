//! Riemann-Liouville integrals and derivatives, the memory kernel `g` and the
//! constants of the moving-average representation.
//!
//! `cargo run --release --example fractional_calculus`

use fbm_ergodics::frac::{frac_derivative, frac_integral, kernel_g_detailed};
use fbm_ergodics::{Grid, HurstContext, SampledPath};

fn main() -> fbm_ergodics::Result<()> {
    let grid = Grid::forward(1.0, 1.0 / 4096.0)?;
    let f = SampledPath::from_scalar_fn(grid, |t| t.exp() * (3.0 * t).cos() + 0.5);
    for alpha in [0.1, 0.2, 0.45] {
        let back = frac_derivative(&frac_integral(&f, alpha)?, alpha)?;
        let err = back.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("alpha = {alpha}: sup |D I f - f| = {err:.2e}");
    }

    let ctx = HurstContext::new(0.7)?;
    println!(
        "H = 0.7: alpha_H = {:.6}, beta_H = {:.6}, kappa_H = {:.6}",
        ctx.alpha(),
        ctx.beta(),
        ctx.fresh_scale()
    );
    for x in [1e-3, 0.1, 1.0, 10.0, 1e3] {
        let g = kernel_g_detailed(x, 0.7)?;
        println!("g({x:e}) = {:.10} (quadrature error estimate {:.1e})", g.value, g.est_error);
    }
    Ok(())
}
