use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dagger| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix trace {0} is not 1")]
    NotUnitTrace(f64),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystem(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("measurements on {0} qubits are not supported (one or two only)")]
    UnsupportedSubsystemSize(usize),
    #[error("state has vanishing norm ({0:e})")]
    DegenerateState(f64),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures that come from numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence(_) | Error::NonFinite(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
