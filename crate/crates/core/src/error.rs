use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible target: k = {k} must satisfy 1 <= k <= {n}")]
    Infeasible { k: usize, n: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("invalid solver configuration: {0}")]
    Config(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("eigendecomposition failed to converge for a {0}x{0} matrix")]
    EigenFailure(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
