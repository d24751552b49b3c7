use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{FbmMethod, FbmSample};
use crate::error::{invalid, Error, Result};
use crate::paths::{Grid, NoiseWindow, SampledPath};
use crate::rng::{normals, RngSeed};

/// Above this many grid points the circulant sampler is used by default.
pub const CHOLESKY_MAX_POINTS: usize = 2048;

/// `Cov(B(t), B(s)) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2`.
pub fn fbm_covariance(t: f64, s: f64, hurst: f64) -> f64 {
    let e = 2.0 * hurst;
    0.5 * (t.abs().powf(e) + s.abs().powf(e) - (t - s).abs().powf(e))
}

fn fgn_autocov(k: usize, hurst: f64, dt: f64) -> f64 {
    let e = 2.0 * hurst;
    let k = k as f64;
    0.5 * dt.powf(e) * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

enum Engine {
    Cholesky(DMatrix<f64>),
    Circulant { scale: Vec<f64>, fft: Arc<dyn Fft<f64>> },
}

/// Reusable exact sampler for one grid and Hurst index.
pub struct FbmSampler {
    grid: Grid,
    hurst: f64,
    method: FbmMethod,
    engine: Engine,
}

impl std::fmt::Debug for FbmSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmSampler").field("grid", &self.grid).field("hurst", &self.hurst).field("method", &self.method).finish()
    }
}

impl FbmSampler {
    /// Picks Cholesky for at most [`CHOLESKY_MAX_POINTS`] points and circulant embedding otherwise.
    pub fn new(grid: Grid, hurst: f64) -> Result<Self> {
        let method = if grid.len() <= CHOLESKY_MAX_POINTS { FbmMethod::ExactCholesky } else { FbmMethod::Circulant };
        Self::with_method(grid, hurst, method)
    }

    pub fn with_method(grid: Grid, hurst: f64, method: FbmMethod) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(invalid(format!("Hurst parameter must lie in (0, 1), got {hurst}")));
        }
        if grid.t0() != 0.0 {
            return Err(invalid("fBm grids must start at t = 0"));
        }
        let engine = match method {
            FbmMethod::ExactCholesky => Engine::Cholesky(cholesky_factor(&grid, hurst)?),
            FbmMethod::Circulant => circulant_engine(&grid, hurst)?,
            FbmMethod::MvnTruncated => {
                return Err(invalid("the truncated moving-average sampler is built with MvnSampler"))
            }
        };
        Ok(Self { grid, hurst, method, engine })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn method(&self) -> FbmMethod {
        self.method
    }

    /// One scalar path, `B(0) = 0`.
    pub fn sample_scalar(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let m = self.grid.len() - 1;
        let mut out = Vec::with_capacity(m + 1);
        out.push(0.0);
        match &self.engine {
            Engine::Cholesky(l) => {
                let z = DVector::from_vec(normals(rng, m));
                let b = l * z;
                out.extend(b.iter());
            }
            Engine::Circulant { scale, fft } => {
                let big = scale.len();
                let z = normals(rng, 2 * big);
                let mut buf: Vec<Complex<f64>> =
                    (0..big).map(|k| Complex::new(scale[k] * z[2 * k], scale[k] * z[2 * k + 1])).collect();
                fft.process(&mut buf);
                let mut acc = 0.0;
                for c in buf.iter().take(m) {
                    acc += c.re;
                    out.push(acc);
                }
            }
        }
        out
    }

    pub fn sample_with(&self, dim: usize, rng: &mut ChaCha8Rng) -> Result<FbmSample> {
        let comps: Vec<Vec<f64>> = (0..dim).map(|_| self.sample_scalar(rng)).collect();
        let path = SampledPath::from_components(self.grid, &comps)?;
        Ok(FbmSample { path, hurst: self.hurst, method: self.method })
    }

    pub fn sample(&self, dim: usize, seed: RngSeed) -> Result<FbmSample> {
        self.sample_with(dim, &mut seed.rng())
    }
}

fn cholesky_factor(grid: &Grid, hurst: f64) -> Result<DMatrix<f64>> {
    let m = grid.len() - 1;
    let cov = DMatrix::from_fn(m, m, |i, j| fbm_covariance(grid.time(i + 1), grid.time(j + 1), hurst));
    let chol = cov.cholesky().ok_or_else(|| {
        Error::NotPositiveDefinite(format!("Cholesky failed for n = {} points, H = {hurst}", grid.len()))
    })?;
    Ok(chol.l())
}

fn circulant_engine(grid: &Grid, hurst: f64) -> Result<Engine> {
    let m = grid.len() - 1;
    let big = 2 * m;
    let dt = grid.dt();
    let mut row: Vec<Complex<f64>> = (0..big)
        .map(|k| {
            let lag = if k <= m { k } else { big - k };
            Complex::new(fgn_autocov(lag, hurst, dt), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(big);
    fft.process(&mut row);
    let max = row.iter().map(|c| c.re).fold(0.0, f64::max);
    let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
    if min < -1e-10 * max {
        return Err(Error::NotPositiveDefinite(format!(
            "circulant embedding of size {big} has eigenvalue {min:e} (max {max:e}) for H = {hurst}"
        )));
    }
    let scale = row.iter().map(|c| (c.re.max(0.0) / big as f64).sqrt()).collect();
    Ok(Engine::Circulant { scale, fft })
}

/// `d` independent fBm components on `grid`; Cholesky up to 2048 points, circulant beyond.
pub fn sample_fbm_exact(grid: &Grid, hurst: f64, dim: usize, seed: RngSeed) -> Result<FbmSample> {
    FbmSampler::new(*grid, hurst)?.sample(dim, seed)
}

pub fn sample_fbm_with(grid: &Grid, hurst: f64, dim: usize, seed: RngSeed, method: FbmMethod) -> Result<FbmSample> {
    FbmSampler::with_method(*grid, hurst, method)?.sample(dim, seed)
}

/// A past window with the stationary fBm law, cut from a forward sample.
pub fn stationary_window(horizon: f64, dt: f64, hurst: f64, dim: usize, rng: &mut ChaCha8Rng) -> Result<NoiseWindow> {
    let sampler = FbmSampler::with_method(Grid::forward(horizon, dt)?, hurst, FbmMethod::Circulant)?;
    NoiseWindow::from_forward_path(&sampler.sample_with(dim, rng)?.path)
}
