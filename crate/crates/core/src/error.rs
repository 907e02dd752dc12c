use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e} exceeds tolerance {tol:.3e})")]
    NotSymmetric { asymmetry: f64, tol: f64 },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is singular to working precision (pivot magnitude {pivot:.3e})")]
    Singular { pivot: f64 },

    #[error("matrix is not positive definite (pivot {index} is {pivot:.3e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("equality constraints are inconsistent (residual {residual:.3e})")]
    InconsistentEqualities { residual: f64 },

    #[error("synthesis infeasible: best margin {margin:.3e}, active constraint block `{block}`")]
    Infeasible { margin: f64, block: String },

    #[error("numerical failure in barrier solve: {reason}")]
    NumericalFailure { reason: String, log: Vec<String> },

    #[error("unsupported dimension {0} (only 2-D level sets are drawn)")]
    UnsupportedDimension(usize),

    #[error("trajectory diverged at step {step}")]
    Divergence { step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
