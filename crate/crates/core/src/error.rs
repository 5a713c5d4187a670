use thiserror::Error;

/// Errors raised by the numerical kernel and the criteria built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix size {rows}x{cols} exceeds the configured maximum {max}")]
    Size { rows: usize, cols: usize, max: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("unsupported local dimension {0}: must be even")]
    UnsupportedDimension(usize),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("numerical routine failed: {0}")]
    Numerical(String),

    #[error("malformed state file: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
