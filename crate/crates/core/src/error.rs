use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Each variant maps onto one of the process exit codes used by the
/// `graphon-lp` binary through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid SBM specification: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io { .. } => 2,
            Error::InvalidSpec(_) | Error::Precondition(_) | Error::Shape(_) => 3,
            Error::Numerical(_) => 4,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
