use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Structural problem with an input (hypergraph, kernel, parameters, config).
    #[error("validation error: {0}")]
    Validation(String),

    /// A hyperedge failed validation; `edge` is its index in the input order.
    #[error("invalid hyperedge {edge}: {reason}")]
    InvalidEdge { edge: usize, reason: String },

    /// The requested model/kernel combination has no defined meaning.
    #[error("unsupported combination: {0}")]
    Unsupported(String),

    /// A bound or threshold was requested outside its domain of validity.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("integration failed at step {step}: {reason}")]
    Integration { step: usize, reason: String },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that come from arithmetic rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::Integration { .. } | Error::NoConvergence { .. }
        )
    }
}
