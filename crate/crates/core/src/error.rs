use thiserror::Error;

#[derive(Debug, Error)]
pub enum PasError {
    #[error("cannot fit a subspace: no rows with positive weight")]
    EmptyFit,
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("target set is empty")]
    EmptyTarget,
    #[error("selection is empty")]
    EmptySelection,
    #[error("kernel bandwidth is zero (all kernel centers coincide)")]
    DegenerateKernel,
    #[error("too few samples: {0}")]
    TooFewSamples(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("label out of range: {0}")]
    Range(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PasError>;

impl PasError {
    pub(crate) fn dims(expected: usize, found: usize) -> Self {
        PasError::DimensionMismatch { expected, found }
    }
}
