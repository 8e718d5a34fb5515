//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by dataset handling, solvers, and inference.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file; positions are 1-based with the header on line 1.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },

    /// Structurally invalid dataset (too few rows, no predictors, ...).
    #[error("invalid dataset: {0}")]
    InvalidData(String),

    /// Column with zero variance cannot be standardized (1-based index).
    #[error("column {index} ({name}) is constant and cannot be standardized")]
    ConstantColumn { index: usize, name: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Inconsistent hyperparameters or CLI flag combination.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Numerical failure inside a solver (non-finite objective and the like).
    #[error("solver failure: {0}")]
    Solver(String),

    /// Gram matrix is not invertible under the exact-inverse precision method.
    #[error("singular Gram matrix: {0}")]
    SingularGram(String),

    /// Nodewise residual variance collapsed for a column (1-based index).
    #[error("collinear column {index}: nodewise residual variance {tau2:.3e} below 1e-12")]
    Collinear { index: usize, tau2: f64 },

    /// Broken precision estimate surfaced as a nonpositive interval variance.
    #[error("nonpositive variance {value:.3e} for coordinate {index} in interval construction")]
    NonPositiveVariance { index: usize, value: f64 },
}

impl Error {
    /// Process exit status for the CLI: 2 for input problems, 1 for
    /// numerical/solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::InvalidData(_)
            | Error::ConstantColumn { .. }
            | Error::DimensionMismatch(_)
            | Error::InvalidConfig(_) => 2,
            Error::Solver(_)
            | Error::SingularGram(_)
            | Error::Collinear { .. }
            | Error::NonPositiveVariance { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
