use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis label out of range: {0}")]
    Bounds(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("unsupported transition: {0}")]
    UnsupportedTransition(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("unsupported frame: {0}")]
    UnsupportedFrame(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("step size too large: {0}")]
    StepSize(String),

    #[error("truncation insufficient: {0}")]
    Truncation(String),

    #[error("segment {index}: {source}")]
    Segment {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_segment(self, index: usize) -> Self {
        Error::Segment {
            index,
            source: Box::new(self),
        }
    }

    /// Innermost error, with any segment wrapper stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Segment { source, .. } => source.root(),
            other => other,
        }
    }
}
