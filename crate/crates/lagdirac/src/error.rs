use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("constraint matrix is rank deficient at q = {q:?} (rank {rank} < {rows})")]
    RankDeficient { q: Vec<f64>, rank: usize, rows: usize },

    #[error("Newton iteration did not converge in {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("step Jacobian is numerically singular (condition estimate {cond:e})")]
    SingularJacobian { cond: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("base point mismatch: {0}")]
    BaseMismatch(String),

    #[error("window at index {index} is incomplete (trajectory has {states} states)")]
    IncompleteWindow { index: usize, states: usize },

    #[error("step {index} failed: {source}")]
    StepFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize, context: &'static str) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            got,
            context,
        })
    }
}
