use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NonHermitianInput { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("projection failed: clipped mass {clipped_mass:e}, trace before renormalization {trace}")]
    ProjectionFailure { clipped_mass: f64, trace: f64 },

    #[error("controller does not match model: {0}")]
    ConfigMismatch(String),

    #[error("argument {value} outside domain {domain}")]
    DomainViolation { value: f64, domain: &'static str },

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    #[error("non-positive value {value} at t = {time} inside fit window")]
    NonPositiveValue { time: f64, value: f64 },

    #[error("series is malformed: {0}")]
    MalformedSeries(&'static str),

    #[error("division by a vanishing Lyapunov value ({value:e})")]
    DivisionByZero { value: f64 },

    #[error("integration failed at t = {time}: {source}")]
    StepFailed {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{failed} of {total} trajectories failed")]
    CampaignFailed { failed: usize, total: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
