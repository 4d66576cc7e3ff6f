use thiserror::Error;

/// Errors raised by the imaging and solver routines.
#[derive(Debug, Error)]
pub enum FireError {
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operation `{op}` requires a linear operator")]
    NonLinear { op: &'static str },
    #[error("unsupported operator for {method}: {kind}")]
    UnsupportedOperator { method: &'static str, kind: String },
    #[error("conjugate gradient did not converge after {iters} iterations (relative residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("non-finite value in iterate at iteration {iter}")]
    NonFinite { iter: usize },
    #[error("restorer `{restorer}` is not compatible with degradation family `{family}`")]
    IncompatibleFamily { restorer: String, family: String },
    #[error("image contains no observed pixels")]
    NothingObserved,
    #[error("image format error: {0}")]
    Format(String),
    #[error(transparent)]
    Remote(#[from] crate::remote::RemoteError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = FireError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> FireError {
    FireError::InvalidParameter(msg.into())
}
