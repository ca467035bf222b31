use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("iteration did not converge within {iterations} sweeps (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("matrix is singular to working precision (pivot {pivot:e})")]
    Singular { pivot: f64 },
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate solution: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
