//! SIS contagion on hypergraphs with nonlinear group infection rates.
//!
//! The crate covers the exact individual-level Markov process
//! ([`stochastic`]), three deterministic mean-field systems ([`meanfield`]),
//! and the spectral stability conditions relating them ([`spectral`]).

pub mod error;
pub mod hypergraph;
pub mod kernel;
pub mod matrix;
pub mod meanfield;
pub mod poisson_binomial;
pub mod spectral;
pub mod stochastic;

pub use error::{Error, Result};
pub use hypergraph::{CoMembershipMatrix, Hypergraph, SizeSpec};
pub use kernel::{InfectionFunction, Kernels};
pub use meanfield::{MeanField, MeanFieldVariant, ModelParams};
pub use spectral::ThresholdReport;
pub use stochastic::{Backend, EnsembleSummary, RunConfig};

/// Shortest round-trip decimal, in exponent form for magnitudes below `1e-4`
/// or from `1e15` up.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}
