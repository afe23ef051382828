use thiserror::Error;

/// Errors produced while configuring, building, querying or decoding structures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid interval [{a}, {b}]: {reason}")]
    InvalidInterval { a: u64, b: u64, reason: String },

    #[error("interval [{a}, {b}] spans {len} positions, longer than the maximum {max}")]
    IntervalTooLong { a: u64, b: u64, len: u128, max: u128 },

    #[error("point {point} is outside the universe of {bits} bits")]
    PointOutOfRange { point: u64, bits: u32 },

    #[error("duplicate point {0}")]
    DuplicatePoint(u64),

    #[error("points are not sorted at index {0}")]
    Unsorted(usize),

    #[error("point count mismatch: expected {expected}, got {actual}")]
    CountMismatch { expected: u64, actual: u64 },

    #[error("malformed subset: {0}")]
    MalformedSubset(String),

    #[error("could not sample {what} after {attempts} attempts")]
    RetryExhausted { what: &'static str, attempts: usize },

    #[error("decode error: {0}")]
    Decode(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn decode(reason: impl Into<String>) -> Self {
        Error::Decode(reason.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
