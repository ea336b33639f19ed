use thiserror::Error;

/// Errors raised by the simulation, sampling, completion and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data violates a structural requirement (non-finite entries, non-orthonormal basis, ...).
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    /// Fewer transmit snapshots than antennas; rows cannot be orthonormal.
    #[error("orthogonal waveforms infeasible: {mt} antennas but only {n} snapshots")]
    InfeasibleOrthogonality { mt: usize, n: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Fusion-center packets inconsistent with the declared sampling protocol.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: impl Into<String>, actual: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            expected: expected.into(),
            actual: actual.into(),
        }
    }
}
