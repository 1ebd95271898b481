use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, NnkError>;

/// Errors raised by the library.
///
/// Data errors carry the offending row (0-based record index, header excluded)
/// so that malformed inputs can be located without re-parsing.
#[derive(Debug, Error)]
pub enum NnkError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    Header(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("row {row}: non-finite value in column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("row {row}: label {label} is not below the class count {num_classes}")]
    LabelOutOfRange {
        row: usize,
        label: u32,
        num_classes: u32,
    },

    #[error("duplicate record id {id} at row {row}")]
    DuplicateId { row: usize, id: u64 },

    #[error("class {label} out of range for {num_classes} classes")]
    ClassOutOfRange { label: u32, num_classes: u32 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("zero-norm embedding at index {index} is undefined under the cosine kernel")]
    ZeroNorm { index: usize },

    #[error("empty candidate pool: every dataset point is excluded")]
    EmptyCandidates,

    #[error("degenerate candidates {first} and {second}: identical kernel columns make the system singular")]
    Degenerate { first: usize, second: usize },

    #[error("unknown prediction for record id {0}")]
    MissingPrediction(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl NnkError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        NnkError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        NnkError::InvalidArgument(message.into())
    }

    /// Whether the error stems from caller-supplied parameters rather than
    /// from input data or the filesystem.
    pub fn is_config(&self) -> bool {
        matches!(self, NnkError::InvalidArgument(_))
    }
}
