use thiserror::Error;

/// Errors produced by the receiver, the code tooling and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Onsager coefficient {0} outside the open interval (0, 1)")]
    AlphaOutOfRange(f64),

    #[error("invalid variance {0}")]
    InvalidVariance(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("alist parse error at line {line}: {msg}")]
    Alist { line: usize, msg: String },

    #[error("matrix file parse error at line {line}: {msg}")]
    MatrixFile { line: usize, msg: String },

    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
