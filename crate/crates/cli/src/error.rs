use thiserror::Error;

/// Failures of the runner, grouped by the exit status they map to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: invalid value for `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("config error: {0}")]
    Parse(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("{0}")]
    Input(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Config { key: key.into(), reason: reason.into() }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }

    /// Process exit status: 2 for configuration and input problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Solver(_) => 3,
            _ => 2,
        }
    }
}

/// Errors of the numerical core raised while setting a run up.
impl From<fracpme::Error> for CliError {
    fn from(e: fracpme::Error) -> Self {
        use fracpme::Error as E;
        match e {
            E::InvalidParameter { name, reason } => Self::config(name, reason),
            E::InadmissibleWarping(msg) => Self::config("warping", msg),
            E::Precondition(msg) | E::InsufficientSampling(msg) => Self::Parse(msg),
            other => Self::Solver(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
