//! Error type shared by every module of the toolkit.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode the library can report.
///
/// Variants are grouped by cause: bad configuration or shapes supplied by the
/// caller, inputs outside a mathematical domain, and numerical procedures that
/// failed to converge.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A configuration value (band limit, Sobolev order, ...) is out of range.
    #[error("configuration error: {0}")]
    Config(String),

    /// Arrays or band limits do not match the grid they are used with.
    #[error("shape error: {0}")]
    Shape(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Liouville Newton solve did not converge inside the trust region.
    #[error("almost-round violation: {reason}; residual history {history:?}")]
    AlmostRoundViolation { reason: String, history: Vec<f64> },

    /// Input data contradict a global identity (e.g. total curvature).
    #[error("inconsistent input: {0}")]
    Inconsistency(String),

    /// Newton iteration for the centering map failed.
    #[error("centering failed after {iterations} iterations; |Theta| trace {trace:?}")]
    Centering { iterations: usize, trace: Vec<f64> },

    /// The polar decomposition of a Moebius matrix is numerically degenerate.
    #[error("decomposition error: {0}")]
    Decomposition(String),

    /// A sphere map cannot be represented or inverted as requested.
    #[error("representation error: {0}")]
    Representation(String),

    /// Orthogonal Procrustes fit is rank deficient.
    #[error("fit error: {0}")]
    Fit(String),

    /// The calibration frame could not be transported.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// A uniformization result no longer satisfies its invariants.
    #[error("stale input: {0}")]
    StaleInput(String),

    /// An operation requires a mode basis of a different provenance.
    #[error("wrong provenance: {0}")]
    WrongProvenance(String),

    /// Malformed or unsupported serialized data.
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// True for failures of iterative solvers (as opposed to invalid input).
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, Error::AlmostRoundViolation { .. } | Error::Centering { .. } | Error::Decomposition(_))
    }
}
