use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid digraph: {0}")]
    InvalidDigraph(String),

    #[error("cannot parse weight {0:?}")]
    ParseWeight(String),

    #[error("family {family}: {reason}")]
    Family { family: String, reason: String },

    #[error("budget of {budget} exceeded while {during}")]
    BudgetExceeded { budget: usize, during: String },

    #[error("spectral radius {radius} is not below 1; (I - A) has no convergent Neumann series")]
    SpectralRadiusTooLarge { radius: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is singular")]
    Singular,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
