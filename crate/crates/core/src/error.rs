use thiserror::Error;

pub type Result<T> = std::result::Result<T, NdwtError>;

#[derive(Debug, Error)]
pub enum NdwtError {
    #[error("unknown filter '{name}'; supported filters: {}", supported.join(", "))]
    UnknownFilter {
        name: String,
        supported: Vec<&'static str>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    /// The requested matrix would exceed the configured element cap.
    #[error(
        "NDWT matrix too large: {required} elements required, {allowed} allowed \
         (raise --max-elements or NDWT_MAX_ELEMENTS)"
    )]
    ResourceLimit { required: u128, allowed: u64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("circulant embedding is not non-negative definite: {0}")]
    Embedding(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl NdwtError {
    pub(crate) fn mismatch(expected: impl ToString, actual: impl ToString) -> Self {
        NdwtError::DimensionMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
