use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The requested readout cannot be traversed within the readout window.
    #[error("infeasible design: {reason} (minimum feasible readout {min_t_read:.4} ms)")]
    Infeasible { reason: String, min_t_read: f64 },

    #[error("template invariant violated: {0}")]
    Invariant(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("trajectory kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("budget exceeded: {what} ({requested:.3e} > {limit:.3e}); {hint}")]
    Budget {
        what: String,
        requested: f64,
        limit: f64,
        hint: String,
    },

    #[error("readout-count search failed: {0}")]
    SearchFailure(String),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category, used as the CLI error tag.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Domain(_) => "domain",
            Error::Infeasible { .. } => "infeasible",
            Error::Invariant(_) => "invariant",
            Error::Assembly(_) => "assembly",
            Error::KindMismatch { .. } => "kind-mismatch",
            Error::Budget { .. } => "budget",
            Error::SearchFailure(_) => "search-failure",
            Error::Config { .. } => "config",
            Error::Format(_) => "format",
            Error::Io { .. } => "io",
        }
    }

    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Io { .. } | Error::Format(_) => 3,
            Error::Budget { .. } => 4,
            Error::Infeasible { .. } | Error::SearchFailure(_) => 5,
            _ => 6,
        }
    }
}
