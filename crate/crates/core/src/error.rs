//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DnleError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("field has {field} values but domain has {nodes} nodes")]
    SizeMismatch { field: usize, nodes: usize },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("inner iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("ODE integration failure: {0}")]
    IntegrationFailure(String),

    #[error("no grid point falls inside the admissible barrier region")]
    EmptyRegion,

    #[error("barrier construction infeasible: {0}")]
    Infeasible(String),

    #[error("envelope gap {gap} still above threshold {threshold} at the horizon")]
    NotConverged { gap: f64, threshold: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
