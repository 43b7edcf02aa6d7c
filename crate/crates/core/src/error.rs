use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported feature at {line}:{column}: {feature}")]
    Unsupported {
        line: usize,
        column: usize,
        feature: String,
    },

    #[error("invalid calibration: {0}")]
    Calibration(String),

    #[error("malformed calibration JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("allocation infeasible: {0}")]
    Infeasible(String),

    #[error("{what} exceeded the configured limit of {limit}")]
    ResourceLimit { what: &'static str, limit: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("unsupported gate for simulation: {0}")]
    UnsupportedGate(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that come from reading user-supplied program or device text.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. } | Error::Unsupported { .. } | Error::Calibration(_) | Error::Json(_)
        )
    }
}
