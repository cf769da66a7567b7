use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Flat input (max == min); the caller should reject the segment.
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("singular least-squares fit: {0}")]
    SingularFit(String),

    #[error("insufficient samples: need {needed}, got {got}")]
    Length { needed: usize, got: usize },

    #[error("segment cannot be labelled: {0}")]
    Unlabelable(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("incompatible artifact: {0}")]
    Compatibility(String),

    #[error("format error: {0}")]
    Format(#[from] FormatError),

    #[error("ingestion error at row {row}, column {column}: {message}")]
    Ingest { row: usize, column: usize, message: String },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported version {found} (expected {expected})")]
    Version { expected: u32, found: u32 },
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("trailing bytes after payload: {0}")]
    Trailing(u64),
    #[error("invalid field: {0}")]
    Invalid(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
