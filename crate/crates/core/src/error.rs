use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument outside the domain of a physical relation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("user {user} has no coverage from access point {ap}")]
    NoCoverage { user: usize, ap: usize },

    #[error("no feasible assignment: every candidate leaves at least one user without coverage")]
    NoFeasibleAssignment,

    #[error("user {user} has non-positive channel gain {gain}")]
    ExcludedUser { user: usize, gain: f64 },

    #[error("enumeration of {requested} assignments exceeds the cap of {cap}; use the greedy search")]
    EnumerationCap { requested: f64, cap: u64 },

    #[error("bandwidth is undefined for an all-zero impulse response")]
    ZeroResponse,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Error {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Error {
        Error::Validation { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::Validation { .. } | Error::Domain(_) | Error::EnumerationCap { .. } => 3,
            Error::NoCoverage { .. } | Error::NoFeasibleAssignment | Error::ExcludedUser { .. } => 4,
            Error::ZeroResponse | Error::Io { .. } | Error::Csv(_) => 1,
        }
    }
}
