use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A subtitle file with content but no usable cue.
    #[error("format error at line {line}: {content:?}")]
    Format { line: usize, content: String },

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("ocr failed on region {region_index}: {message}")]
    Ocr {
        region_index: usize,
        message: String,
    },

    #[error("asset write failed on region {region_index}: {message}")]
    Asset {
        region_index: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
