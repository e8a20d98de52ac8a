use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),

    #[error("zoom mismatch: expected {expected}, found {found}")]
    ZoomMismatch { expected: u8, found: u8 },

    #[error("offset ({dx}, {dy}) lies outside the reachable neighborhood of radius {delta_r}")]
    OutOfNeighborhood { dx: i64, dy: i64, delta_r: u32 },

    #[error("index {index} out of range [0, {len})")]
    IndexRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tile ({x}, {y}) at zoom {q} is not active")]
    NotFound { q: u8, x: u32, y: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("geometry mismatch: {0}")]
    Geometry(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("{malformed} of {total} lines malformed (first bad lines: {samples:?})")]
    TooManyMalformed {
        malformed: usize,
        total: usize,
        samples: Vec<usize>,
    },

    #[error("{nodes} active tiles exceeds the dense limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn format(offset: u64, message: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: message.into(),
        }
    }
}
