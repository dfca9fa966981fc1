use thiserror::Error;

/// Errors raised by the bounding engine.
///
/// Variants that correspond to an algorithm "not returning a bound" are
/// surfaced as failures in sweep reports; the remaining variants signal
/// malformed input.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("continuous outcome requires binarization")]
    ContinuousOutcome,
    #[error("dataset has no instrument column")]
    MissingInstrument,
    #[error("degenerate instrument arm")]
    DegenerateInstrumentArm,
    #[error("treatment arm {0} has no observations")]
    EmptyTreatmentArm(u8),
    #[error("treatment has no variance")]
    NoTreatmentVariance,
    #[error("weak/irrelevant instrument")]
    WeakInstrument,
    #[error("data inconsistent with IV model")]
    InconsistentIvData,
    #[error("linear program infeasible")]
    Infeasible,
    #[error("linear program unbounded")]
    Unbounded,
    #[error("cutting plane did not converge")]
    CuttingPlaneNotConverged,
    #[error("simplex iteration limit reached")]
    IterationLimit,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
