use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("row {row} of the transition matrix sums to {sum} (expected 1)")]
    RowSum { row: usize, sum: f64 },

    #[error("invalid transition matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },

    #[error("index {index} out of range for {len} states")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("undefined conditional: {0}")]
    UndefinedConditional(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("stationary distribution did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("exhaustive partition search supports at most {max} states (got {n}); use greedy mode")]
    SearchTooLarge { n: usize, max: usize },

    #[error("undefined-realization: {0}")]
    UndefinedRealization(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}
