use thiserror::Error;

/// Everything that can go wrong while fitting, building or generating models.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("source models use different families ({first} vs {other}); coefficient hyper-models need one common family")]
    HeterogeneousFamilies { first: String, other: String },

    #[error("hyper-model of degree {degree} needs {features} samples, only {samples} available")]
    Underdetermined {
        degree: usize,
        features: usize,
        samples: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported model file format version {0}")]
    UnsupportedVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
