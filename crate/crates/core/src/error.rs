use thiserror::Error;

/// Error type shared by every solver and the verification harness.
///
/// The variants are grouped by how the command-line front end maps them to
/// exit codes: parameter and invariant problems are caller mistakes or
/// violated runtime guarantees (exit 2), solver failures are numerical
/// breakdowns (exit 3).
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two objects built against different surface spectra were combined.
    #[error("spectrum mismatch: {0}")]
    SpectrumMismatch(String),

    /// Input sizes disagree (sample/node counts, coefficient lengths).
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    /// A runtime invariant (maximum principle, norm bound) was violated.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// A linear solve or iteration broke down.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// An iterative method did not converge within its iteration cap.
    #[error("no convergence after {iterations} iterations ({context})")]
    NonConvergence { iterations: usize, context: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 for parameter/invariant
    /// problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::SpectrumMismatch(_)
            | Error::SizeMismatch { .. }
            | Error::InvariantViolation(_)
            | Error::Config(_) => 2,
            Error::SolverFailure(_) | Error::NonConvergence { .. } => 3,
            Error::Io(_) => 1,
        }
    }
}
