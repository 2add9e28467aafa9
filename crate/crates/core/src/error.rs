use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no parseable API records in log ({malformed} malformed lines)")]
    EmptyLog { malformed: usize },

    #[error("API vocabulary is empty")]
    EmptyVocabulary,

    #[error("dimension mismatch: expected d={expected}, got d={actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("label {label} out of range for {n_classes} classes")]
    InvalidLabel { label: usize, n_classes: usize },

    #[error("class {class} has {count} labeled samples, at least {required} required")]
    ClassTooSmall {
        class: usize,
        count: usize,
        required: usize,
    },

    #[error(
        "covariance is not positive definite after regularization (epsilon up to {epsilon:e})"
    )]
    NotPositiveDefinite { epsilon: f64 },

    #[error("zero-variance data")]
    ZeroVariance,

    #[error("every candidate covariance family failed to fit")]
    AllFamiliesFailed,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
