use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation
    /// (e.g. visibility outside [0, 1], a non-positive operator).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration, recipe field, or schedule.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input data violates a structural precondition (unsorted streams,
    /// empty strategy, degenerate fit design matrix).
    #[error("bad input: {0}")]
    BadInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code the command-line tool maps this error to:
    /// 2 for validation problems, 1 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::BadInput(_) => 2,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}
