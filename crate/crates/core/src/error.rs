use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed text file; `line` is 1-based.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Malformed binary file; `offset` is the byte where decoding failed.
    #[error("{} (byte {offset}): {message}", path.display())]
    Format {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("invalid transform: {0}")]
    InvalidTransform(String),

    #[error("empty foreground")]
    EmptyForeground,

    #[error("empty scene")]
    EmptyScene,

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the environment (missing files, bad
    /// formats) rather than the numeric content of valid inputs.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Parse { .. } | Error::Format { .. }
        )
    }
}
