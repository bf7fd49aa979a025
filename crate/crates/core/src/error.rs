use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid node pair ({0}, {1})")]
    InvalidPair(usize, usize),

    #[error("edge ({0}, {1}) already exists")]
    EdgeExists(usize, usize),

    #[error("group is empty")]
    EmptyGroup,

    #[error("matrix is singular (is the graph connected?)")]
    SingularMatrix,

    #[error("graph with {n} nodes exceeds the dense cap of {cap}")]
    GraphTooLarge { n: usize, cap: usize },

    #[error("budget k={k} exceeds the {available} available candidate pairs")]
    BudgetTooLarge { k: usize, available: usize },

    #[error("exhaustive search over {subsets} subsets exceeds the cap of {cap}")]
    CombinatorialBlowup { subsets: u128, cap: u128 },

    #[error(
        "solver did not converge after {iterations} iterations (relative residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("graph has no non-edge left")]
    NoNonEdge,

    #[error("only {available} candidate pairs available, {needed} requested")]
    InsufficientCandidates { needed: usize, available: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
