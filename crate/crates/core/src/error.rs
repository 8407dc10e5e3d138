use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two points that must be distinct coincide (zero-length link).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// The radiation pattern vanishes at a link endpoint.
    #[error("node `{node}` is out of RIS coverage (elevation {elevation_rad:.4} rad)")]
    OutOfCoverage { node: &'static str, elevation_rad: f64 },

    /// Phase of a zero-magnitude coefficient was requested.
    #[error("undefined phase: coefficient {index} has zero magnitude")]
    UndefinedPhase { index: usize },

    /// A transition vector does not describe a probability distribution.
    #[error("invalid transition probabilities {probs:?}: {reason}")]
    InvalidTransitions { probs: [f64; 4], reason: String },

    /// An iterative numerical method did not meet its tolerance.
    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
