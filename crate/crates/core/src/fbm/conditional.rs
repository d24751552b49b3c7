use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::frac::{FracIntegrator, HurstContext, MemoryOperator};
use crate::paths::{concat_m, grid_steps_of, Grid, NoiseWindow, SampledPath};
use crate::rng::{normals, RngSeed};

/// A continuation of a past window: `path = mean + κ_H I^{H-1/2} brownian`.
#[derive(Debug, Clone, PartialEq)]
pub struct Continuation {
    pub path: SampledPath,
    pub mean: SampledPath,
    /// Fresh Brownian motion on the future grid; the Malliavin weights integrate against it.
    pub brownian: SampledPath,
}

/// Samples futures given pasts of one fixed shape; the memory weights and
/// the fractional-integral weights are computed once.
#[derive(Debug, Clone)]
pub struct ConditionalSampler {
    memory: MemoryOperator,
    integrator: FracIntegrator,
    fresh_scale: f64,
    future: Grid,
}

impl ConditionalSampler {
    pub fn new(ctx: &HurstContext, window_dt: f64, window_len: usize, future: Grid) -> Result<Self> {
        if future.t0() != 0.0 {
            return Err(invalid("future grid must start at t = 0"));
        }
        let memory = MemoryOperator::new(ctx, window_dt, window_len, future)?;
        let integrator = FracIntegrator::new(ctx.kappa(), future.dt(), future.len())?;
        Ok(Self { memory, integrator, fresh_scale: ctx.fresh_scale(), future })
    }

    pub fn for_window(ctx: &HurstContext, w: &NoiseWindow, future: Grid) -> Result<Self> {
        Self::new(ctx, w.dt(), w.len(), future)
    }

    pub fn future(&self) -> &Grid {
        &self.future
    }

    pub fn memory(&self) -> &MemoryOperator {
        &self.memory
    }

    /// Conditional mean `A w` on the future grid.
    pub fn mean(&self, w: &NoiseWindow) -> Result<SampledPath> {
        self.memory.apply(w)
    }

    /// `κ_H I^{H-1/2} b` for a scalar Brownian path `b` on the future grid.
    pub fn fresh_part(&self, b: &[f64]) -> Vec<f64> {
        self.integrator.apply(b).into_iter().map(|v| self.fresh_scale * v).collect()
    }

    fn fresh_part_increment_form(&self, b: &[f64]) -> Vec<f64> {
        self.integrator.apply_increment_form(b).into_iter().map(|v| self.fresh_scale * v).collect()
    }

    pub fn brownian(&self, dim: usize, rng: &mut ChaCha8Rng) -> Result<SampledPath> {
        let n = self.future.len();
        let sd = self.future.dt().sqrt();
        let comps: Vec<Vec<f64>> = (0..dim)
            .map(|_| {
                let mut b = Vec::with_capacity(n);
                let mut acc = 0.0;
                b.push(0.0);
                for z in normals(rng, n - 1) {
                    acc += sd * z;
                    b.push(acc);
                }
                b
            })
            .collect();
        SampledPath::from_components(self.future, &comps)
    }

    /// Continuation driven by a given Brownian path.
    pub fn continue_with_brownian(&self, w: &NoiseWindow, brownian: SampledPath) -> Result<Continuation> {
        self.assemble(w, brownian, |s, b| s.fresh_part(b))
    }

    fn assemble(
        &self,
        w: &NoiseWindow,
        brownian: SampledPath,
        fresh: impl Fn(&Self, &[f64]) -> Vec<f64>,
    ) -> Result<Continuation> {
        if brownian.dim() != w.dim() || brownian.len() != self.future.len() {
            return Err(invalid("Brownian path does not match window dimension or future grid"));
        }
        let mean = self.mean(w)?;
        let comps: Vec<Vec<f64>> = (0..w.dim())
            .map(|j| {
                let f = fresh(self, &brownian.component(j));
                mean.component(j).iter().zip(f).map(|(m, x)| m + x).collect()
            })
            .collect();
        let path = SampledPath::from_components(self.future, &comps)?;
        Ok(Continuation { path, mean, brownian })
    }

    pub fn continue_with(&self, w: &NoiseWindow, rng: &mut ChaCha8Rng) -> Result<Continuation> {
        let b = self.brownian(w.dim(), rng)?;
        self.continue_with_brownian(w, b)
    }

    pub fn continue_window(&self, w: &NoiseWindow, seed: RngSeed) -> Result<Continuation> {
        self.continue_with(w, &mut seed.rng())
    }
}

/// Draws a future on `future` from the conditional law given the past `w`.
pub fn conditional_continue(w: &NoiseWindow, future: &Grid, ctx: &HurstContext, seed: RngSeed) -> Result<Continuation> {
    ConditionalSampler::for_window(ctx, w, *future)?.continue_window(w, seed)
}

/// Same draw as [`conditional_continue`], with the fresh part computed as
/// `∫_0^t (t - r)^{H-1/2} dB(r) / Γ(H + 1/2)`.
pub fn conditional_continue_increment_form(
    w: &NoiseWindow,
    future: &Grid,
    ctx: &HurstContext,
    seed: RngSeed,
) -> Result<Continuation> {
    let sampler = ConditionalSampler::for_window(ctx, w, *future)?;
    let b = sampler.brownian(w.dim(), &mut seed.rng())?;
    sampler.assemble(w, b, |s, b| s.fresh_part_increment_form(b))
}

/// Repeated steps of the noise semigroup for windows of one fixed shape.
#[derive(Debug, Clone)]
pub struct NoiseSemigroup {
    sampler: ConditionalSampler,
    step: f64,
    horizon: f64,
}

impl NoiseSemigroup {
    pub fn new(ctx: &HurstContext, window_dt: f64, horizon: f64, step: f64) -> Result<Self> {
        let len = grid_steps_of(horizon, window_dt)? + 1;
        let future = Grid::forward(step, window_dt)?;
        Ok(Self { sampler: ConditionalSampler::new(ctx, window_dt, len, future)?, step, horizon })
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    pub fn sampler(&self) -> &ConditionalSampler {
        &self.sampler
    }

    /// Steps `w` and returns the untrimmed window together with the continuation.
    pub fn step_untrimmed(&self, w: &NoiseWindow, rng: &mut ChaCha8Rng) -> Result<(NoiseWindow, Continuation)> {
        let c = self.sampler.continue_with(w, rng)?;
        Ok((concat_m(w, &c.path, self.step)?, c))
    }

    /// One step followed by trimming back to the fixed horizon.
    pub fn step(&self, w: &NoiseWindow, rng: &mut ChaCha8Rng) -> Result<(NoiseWindow, Continuation)> {
        let (long, c) = self.step_untrimmed(w, rng)?;
        Ok((long.trim(self.horizon)?, c))
    }
}

/// Samples from `P_t(w, ·)` without trimming; `shift_theta(result, t) == w`.
pub fn semigroup_step_untrimmed(w: &NoiseWindow, t: f64, ctx: &HurstContext, seed: RngSeed) -> Result<NoiseWindow> {
    if !(t > 0.0) {
        return Err(invalid("semigroup step needs t > 0"));
    }
    let sg = NoiseSemigroup::new(ctx, w.dt(), w.horizon(), t)?;
    Ok(sg.step_untrimmed(w, &mut seed.rng())?.0)
}

/// Samples from `P_t(w, ·)` and trims back to the horizon of `w`.
pub fn semigroup_step(w: &NoiseWindow, t: f64, ctx: &HurstContext, seed: RngSeed) -> Result<NoiseWindow> {
    if !(t > 0.0) {
        return Err(invalid("semigroup step needs t > 0"));
    }
    let sg = NoiseSemigroup::new(ctx, w.dt(), w.horizon(), t)?;
    Ok(sg.step(w, &mut seed.rng())?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::shift_theta;

    fn setup() -> (HurstContext, NoiseWindow) {
        let ctx = HurstContext::new(0.7).unwrap();
        let w = NoiseWindow::from_fn(8.0, 0.0625, 2, |s| vec![(2.0 * s).sin(), s * 0.3]).unwrap();
        (ctx, w)
    }

    #[test]
    fn continuation_starts_at_zero() {
        let (ctx, w) = setup();
        let c = conditional_continue(&w, &Grid::forward(1.0, 0.0625).unwrap(), &ctx, RngSeed::new(7)).unwrap();
        assert_eq!(c.path.row(0), &[0.0, 0.0]);
        assert_eq!(c.brownian.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn path_and_increment_forms_agree() {
        let (ctx, w) = setup();
        let g = Grid::forward(2.0, 0.0625).unwrap();
        let a = conditional_continue(&w, &g, &ctx, RngSeed::new(3)).unwrap();
        let b = conditional_continue_increment_form(&w, &g, &ctx, RngSeed::new(3)).unwrap();
        assert!(a.path.max_abs_diff(&b.path) < 1e-12);
    }

    #[test]
    fn stepping_then_shifting_recovers_the_past() {
        let (ctx, w) = setup();
        let long = semigroup_step_untrimmed(&w, 1.0, &ctx, RngSeed::new(11)).unwrap();
        assert_eq!(shift_theta(&long, 1.0).unwrap(), w);
        let short = semigroup_step(&w, 1.0, &ctx, RngSeed::new(11)).unwrap();
        assert_eq!(short.len(), w.len());
        assert_eq!(short.values(), long.trim(w.horizon()).unwrap().values());
        assert!(semigroup_step(&w, 0.0, &ctx, RngSeed::new(1)).is_err());
    }
}
