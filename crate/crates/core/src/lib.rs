//! Ergodic toolkit for stochastic differential equations driven by fractional
//! Brownian motion with Hurst parameter `H > 1/2`.
//!
//! The crate is organised bottom-up:
//!
//! * [`paths`]: uniform grids, sampled paths, past noise windows, Hölder-type
//!   norms and the shift/concatenation algebra of the noise space.
//! * [`frac`]: Riemann–Liouville fractional integrals and derivatives, the
//!   memory kernel `g`, the conditional-mean operator `A` and the constants
//!   tying the moving-average representation of fBm together.
//! * [`fbm`]: exact fBm samplers, conditional continuation of a past path and
//!   the noise semigroup.
//! * [`sde`]: the pathwise Euler–Young solver, the stochastic dynamical
//!   system built on top of it, and the Jacobian / noise-derivative flows.
//! * [`ergodics`]: Monte-Carlo diagnostics for Lyapunov contraction,
//!   stationarity, strong Feller continuity, Bismut–Elworthy–Li sensitivities,
//!   controllability and subcouplings of the noise semigroup.
//! * [`cli`]: config-driven experiment runner used by the `fbmerg` binary.
//! * [`verify`]: the pinned-seed verification suites.

pub mod cli;
pub mod ergodics;
pub mod error;
pub mod fbm;
pub mod frac;
pub mod paths;
pub mod quad;
pub mod rng;
pub mod sde;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use fbm::{FbmMethod, FbmSample};
pub use frac::HurstContext;
pub use paths::{Grid, HolderParams, NoiseWindow, SampledPath};
pub use rng::RngSeed;
pub use sde::{ModelSpec, Trajectory};
