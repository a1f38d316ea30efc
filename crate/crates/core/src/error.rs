use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Bell spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("invalid protocol configuration: {0}")]
    InvalidConfig(String),

    #[error("Bell index {0} out of range (expected 0..=3)")]
    BellIndex(usize),

    #[error("singular measuring direction: {0}")]
    SingularDirection(String),

    #[error("measuring directions give a degenerate linear system (|det| = {0:e})")]
    SingularDirections(f64),

    #[error("error rates are infeasible: {0}")]
    InfeasibleRates(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("matrix is not unitary (max |V^dag V - I| = {0:e})")]
    NotUnitary(f64),

    #[error("no sign change found: {0}")]
    NoCrossing(String),
}

pub type Result<T> = std::result::Result<T, Error>;
