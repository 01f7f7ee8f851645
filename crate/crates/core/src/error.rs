use thiserror::Error;

/// Errors raised by the solvers and their building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("starting point is not a member of the feasible set")]
    InfeasibleStart,

    #[error("inner solver exceeded its iteration guard ({limit} iterations, last gap {last_gap:.3e}, eta {eta:.3e})")]
    InnerGuard { limit: usize, last_gap: f64, eta: f64 },

    #[error("backtracking aborted at outer step {k}: trial L = {l_trial:.3e} exceeds ceiling {ceiling:.3e}")]
    LinesearchAbort { k: usize, l_trial: f64, ceiling: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
