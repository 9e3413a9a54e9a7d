use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed bitstring {input:?}: {reason}")]
    Format { input: String, reason: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },

    /// The marginal shares no reduced outcome with the prior's support, so the
    /// update would leave an empty distribution.
    #[error("degenerate update: marginal #{index} over qubits {qubits:?} matches no outcome of the prior")]
    DegenerateUpdate { index: usize, qubits: Vec<usize> },

    #[error("cannot access {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid JSON in {path}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {message}")]
    Validation { path: String, message: String },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// Numerical failures (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::DegenerateUpdate { .. })
    }

    /// Attach a file name to validation-type errors.
    pub fn in_file(self, path: impl Into<String>) -> Self {
        match self {
            Error::Io { .. } | Error::Json { .. } | Error::Validation { .. } => self,
            Error::DegenerateUpdate { .. } => self,
            other => Error::Validation {
                path: path.into(),
                message: other.to_string(),
            },
        }
    }
}
