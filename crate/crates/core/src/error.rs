//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by lattice construction, diagonalization, propagation,
/// sweeps, and the detection model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A declarative specification violates its own invariants
    /// (mismatched field lengths, non-increasing labels, non-positive times).
    #[error("specification error: {0}")]
    Spec(String),

    /// A site, bond, or dressed-state index is outside the chain.
    #[error("{what} index {index} out of range for length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    /// Non-finite values where finite numbers are required.
    #[error("numeric error: {0}")]
    NonFinite(String),

    /// The iterative eigensolver failed to converge.
    #[error("numeric error: {0}")]
    Convergence(String),

    /// A time grid is unusable: non-monotone, non-uniform where uniformity
    /// is required, or too short for the requested analysis.
    #[error("time grid error: {0}")]
    TimeGrid(String),

    /// The chain shape does not support the requested observable
    /// (e.g. mid-gap splitting of an odd chain).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// Input is degenerate for the requested operation
    /// (e.g. renormalizing a trajectory with vanished survival).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A quantity lies outside the mathematical domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested field is never reached by the ionization ramp.
    #[error(
        "ionization field {field:.3} V/cm is not reached by a ramp peaking at {peak:.3} V/cm"
    )]
    RampMismatch { field: f64, peak: f64 },

    /// The unmixing basis is (numerically) rank deficient; the two most
    /// collinear traces are identified by index.
    #[error(
        "ill-posed basis: traces {first} and {second} are collinear (|correlation| = {correlation:.12})"
    )]
    IllPosedBasis {
        first: usize,
        second: usize,
        correlation: f64,
    },

    /// No oscillation peak above the noise floor.
    #[error("no dominant oscillation: {0}")]
    NoPeak(String),
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonFinite(_) | Error::Convergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
