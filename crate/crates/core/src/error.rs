use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("window exhausted: requested {requested} but only {available} of past is available")]
    WindowExhausted { requested: f64, available: f64 },

    #[error("solution diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },

    #[error("covariance embedding is not positive semi-definite: {0}")]
    NotPositiveDefinite(String),

    #[error("diffusion matrix is not invertible at {0:?}")]
    SingularDiffusion(Vec<f64>),

    #[error("horizon too short: need at least {required}, got {got}")]
    HorizonTooShort { required: f64, got: f64 },

    #[error("diagnostic failure: {0}")]
    Diagnostic(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
