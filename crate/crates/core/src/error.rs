use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("signal length {0} is even; the Hankel embedding needs an odd length 2n-1")]
    EvenLength(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "truncated SVD did not converge after {restarts} restarts (worst residual {residual:e})"
    )]
    NonConvergence { restarts: usize, residual: f64 },

    #[error("matrix pencil is ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}
