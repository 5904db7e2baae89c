use serde::{Deserialize, Serialize};

/// Work limits shared by the enumerating operations.
///
/// Every limit is checked before work starts, so an over-budget request fails
/// fast with [`crate::Error::ResourceGuard`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    /// Largest `a^n` the pigeonhole scan may visit.
    pub max_windows: u64,
    /// Largest denominator a census or record scan may reach.
    pub max_denominator: u64,
    /// Largest `a^max_len` for form enumeration.
    pub max_forms: u64,
    /// Digits a refining comparison may pull from an unbounded stream.
    pub max_stream_digits: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_windows: 1 << 22,
            max_denominator: 1 << 32,
            max_forms: 1 << 22,
            max_stream_digits: 1 << 16,
        }
    }
}
