//! Fractional Brownian motion: exact samplers, conditional continuation of a
//! past window and the noise semigroup built from it.

mod conditional;
mod exact;
mod mvn;

use serde::{Deserialize, Serialize};

pub use conditional::{
    conditional_continue, conditional_continue_increment_form, semigroup_step, semigroup_step_untrimmed,
    ConditionalSampler, Continuation, NoiseSemigroup,
};
pub use exact::{fbm_covariance, sample_fbm_exact, sample_fbm_with, stationary_window, FbmSampler, CHOLESKY_MAX_POINTS};
pub use mvn::{sample_mvn_truncated, MvnSample, MvnSampler};

use crate::paths::SampledPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FbmMethod {
    ExactCholesky,
    Circulant,
    MvnTruncated,
}

impl std::str::FromStr for FbmMethod {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "cholesky" | "exact-cholesky" => Ok(Self::ExactCholesky),
            "circulant" => Ok(Self::Circulant),
            "mvn" | "mvn-truncated" => Ok(Self::MvnTruncated),
            other => Err(crate::Error::Parse(format!("unknown fBm method `{other}`"))),
        }
    }
}

/// A sampled fBm path together with how it was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbmSample {
    pub path: SampledPath,
    pub hurst: f64,
    pub method: FbmMethod,
}
