use thiserror::Error;

use crate::eigsolve::TraceRow;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("interval ({a}, {b}) unresolvable at this resolution (length < 2h with h = {h})")]
    IntervalUnresolvable { a: f64, b: f64, h: f64 },

    #[error("unsupported dimension N = {0}; only N = 1 is implemented")]
    UnsupportedDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("denominator constraint violated: weighted mass {0} <= 0")]
    DenominatorConstraint(f64),

    #[error("zero function not admissible here")]
    ZeroFunction,

    #[error("positivity set unresolved by mesh")]
    PositivitySetUnresolved,

    #[error("no sign-changing candidate found")]
    NoSignChangingCandidate,

    #[error("Nehari manifold empty (lambda <= lambda_1 admits no nontrivial solution)")]
    NehariEmpty { lambda: f64 },

    #[error("mesh too small: {0} nodes")]
    MeshTooSmall(usize),

    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        trace: Vec<TraceRow>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
