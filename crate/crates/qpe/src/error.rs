use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("dimension mismatch: state dim {state} vs operator dim {operator}")]
    DimensionMismatch { state: usize, operator: usize },

    #[error("invalid level indices: {0}")]
    InvalidLevels(String),

    #[error("random stream exhausted")]
    StreamExhausted,

    #[error("probability went negative inside the finite-difference stencil: {0}")]
    NegativeProbability(String),

    #[error("state normalization drifts by {drift:e} across the stencil")]
    NormalizationDrift { drift: f64 },

    #[error("Fisher matrix is singular along direction {null_direction:?}")]
    SingularFisher { null_direction: Vec<f64> },

    #[error("Fisher information must be positive, got {0}")]
    NonPositiveFisher(f64),

    #[error("transcript has no final reveal; estimation requires it")]
    MissingReveal,

    #[error("no usable rounds for estimation: {0}")]
    NoUsableRounds(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
