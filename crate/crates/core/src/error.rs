use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its allowed range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Operand dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Gram–Schmidt met a (numerically) dependent column.
    #[error("Gram-Schmidt degeneracy at column {column}: residual norm {residual:e}")]
    Degenerate { column: usize, residual: f64 },

    /// A computation would exceed a configured resource cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Malformed input text (circuit files, configs).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("IO error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
