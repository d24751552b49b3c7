//! Draws fBm paths with both exact samplers and checks `Var B(1) = 1`.
//!
//! `cargo run --release --example sample_fbm`

use fbm_ergodics::fbm::{fbm_covariance, FbmSampler};
use fbm_ergodics::paths::write_csv;
use fbm_ergodics::{FbmMethod, Grid, RngSeed};

fn main() -> fbm_ergodics::Result<()> {
    let h = 0.7;
    let grid = Grid::forward(1.0, 1.0 / 256.0)?;
    for method in [FbmMethod::ExactCholesky, FbmMethod::Circulant] {
        let sampler = FbmSampler::with_method(grid, h, method)?;
        let n = 4000;
        let mut sq = 0.0;
        for i in 0..n {
            let b = sampler.sample(1, RngSeed::new(7).substream(i))?.path;
            sq += b.last()[0].powi(2);
        }
        println!("{method:?}: mean B(1)^2 = {:.4} (exact {})", sq / n as f64, fbm_covariance(1.0, 1.0, h));
    }

    let path = FbmSampler::new(Grid::forward(1.0, 1.0 / 8.0)?, h)?.sample(2, RngSeed::new(1))?.path;
    write_csv(&path, std::io::stdout())?;
    Ok(())
}
