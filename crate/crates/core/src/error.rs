use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge list is not a leaf-insertion sequence: {0}")]
    NonTreeInput(String),
    #[error("unknown vertex {vertex} (tree has {n} vertices)")]
    UnknownVertex { vertex: usize, n: usize },
    #[error("psi is undefined on a single-vertex tree")]
    Undefined,
    #[error("vertex {vertex} has degree {degree}, above the host degree {d}")]
    DegreeOverflow { vertex: usize, degree: usize, d: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size overflow: {0}")]
    Overflow(String),
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
