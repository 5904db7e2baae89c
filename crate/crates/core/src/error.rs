use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad base {0}: base must satisfy 2 < b <= {max}", max = crate::scheme::MAX_BASE)]
    BadBase(u64),

    #[error("bad digit set: {0}")]
    BadDigits(String),

    #[error("value {0} lies outside [0, 1]")]
    OutOfRange(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("invalid digit stream: {0}")]
    InvalidStream(String),

    /// The stream could not supply enough digits. `needed` is the total
    /// number of base-b0 digits the caller asked for.
    #[error("precision exhausted: needed {needed} digits, stream supplies {available}")]
    PrecisionExhausted { needed: usize, available: usize },

    #[error("resource guard: {what} = {requested} exceeds budget {budget}")]
    ResourceGuard {
        what: &'static str,
        requested: u128,
        budget: u128,
    },

    #[error("lower band N({s}, {t}) is empty")]
    DivisionByZeroCount { s: u64, t: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("corrupt checkpoint {path}: {reason}")]
    CorruptCheckpoint { path: PathBuf, reason: String },

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn guard(
        what: &'static str,
        requested: impl Into<u128>,
        budget: impl Into<u128>,
    ) -> Self {
        Error::ResourceGuard {
            what,
            requested: requested.into(),
            budget: budget.into(),
        }
    }
}
