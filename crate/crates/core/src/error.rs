use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("trivial family: {0}")]
    TrivialFamily(&'static str),
    #[error("ground set of size {n} exceeds the cap of {cap}")]
    GroundSetTooLarge { n: usize, cap: usize },
    #[error("{count} minimal sets exceed the cover cap of {cap}")]
    TooManyMinimalSets { count: usize, cap: usize },
    #[error("graph too large: {0}")]
    GraphTooLarge(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("vertex count {n} is not divisible by {k}")]
    NotDivisible { n: usize, k: usize },
    #[error("pattern graph with {needed} vertices cannot embed into {available} vertices")]
    NoEmbedding { needed: usize, available: usize },
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("measure {0} is degenerate (outside (1e-12, 1 - 1e-12))")]
    DegenerateMeasure(f64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("random generation failed after {0} attempts")]
    GenerationFailed(usize),
    #[error("sweep found no qualifying p (this is a bug): {0}")]
    SweepFailed(String),
    #[error("Monte Carlo estimate inconclusive: {0}")]
    Inconclusive(String),
    #[error("invalid input at {path}: {message}")]
    Invalid { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::GroundSetTooLarge { .. }
            | Error::TooManyMinimalSets { .. }
            | Error::GraphTooLarge(_)
            | Error::TooLarge(_) => 3,
            Error::Inconclusive(_) => 4,
            Error::SweepFailed(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
