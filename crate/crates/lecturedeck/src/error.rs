use std::path::PathBuf;

use serde::Serialize;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] lecturedeck_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode image {}: {message}", path.display())]
    Image { path: PathBuf, message: String },

    #[error("no frames found in {}", path.display())]
    NoFrames { path: PathBuf },

    #[error("decoder command `{command}` failed: {detail}")]
    Decoder { command: String, detail: String },

    #[error("transport error: {0}")]
    Transport(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("corrupt store file {}: {detail}", file.display())]
    CorruptStore { file: PathBuf, detail: String },

    #[error("store {} is locked by another writer (remove {} if stale)", root.display(), lock.display())]
    Locked { root: PathBuf, lock: PathBuf },

    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        use lecturedeck_core::Error as C;
        match self {
            Error::Core(C::InvalidInput(_)) => "invalid_input",
            Error::Core(C::Format { .. }) => "format",
            Error::Core(C::Consistency(_)) => "consistency",
            Error::Core(C::Conflict(_)) | Error::Conflict(_) => "conflict",
            Error::Core(C::Ocr { .. }) | Error::Transport(_) => "transport",
            Error::Core(C::Asset { .. }) | Error::Io { .. } => "io",
            Error::Image { .. } => "image",
            Error::NoFrames { .. } | Error::Decoder { .. } => "ingest",
            Error::NotFound(_) => "not_found",
            Error::CorruptStore { .. } => "corrupt_store",
            Error::Locked { .. } => "locked",
            Error::Bind { .. } => "bind",
            Error::Usage(_) => "usage",
        }
    }

    /// Process exit status: 1 for usage errors, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            _ => 2,
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            code: self.code(),
            message: self.to_string(),
        }
    }
}

/// The JSON object printed on stderr when a command fails.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub code: &'static str,
    pub message: String,
}
