use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] csf_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Process exit code: 1 for validation failures, 2 for I/O and parse
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(_) | Error::Invalid(_) => 1,
            Error::Io { .. } | Error::Parse { .. } | Error::Json { .. } | Error::Input(_) => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
