use thiserror::Error;

use crate::network::Activation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layer dimensions: {0}")]
    InvalidDims(String),

    #[error("input width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("activation `{0}` is not twice continuously differentiable")]
    NonSmoothActivation(Activation),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("training diverged at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("CFL violation: dt = {dt} exceeds limit {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("density {value} outside [0, 1]")]
    DensityRange { value: f64 },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("reference field has zero norm")]
    ZeroNorm,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Parse {
            what,
            detail: detail.into(),
        }
    }
}
