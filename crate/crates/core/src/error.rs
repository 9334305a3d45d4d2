use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the function.
    #[error("{name} = {value} is outside the valid domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("block index {index} is out of range for 2K = {block_len} (must be < {limit})")]
    IndexOutOfRange {
        index: u128,
        block_len: usize,
        limit: u128,
    },

    #[error("not a permutation of 0..{block_len}: {mapping:?}")]
    InvalidPermutation {
        block_len: usize,
        mapping: Vec<usize>,
    },

    #[error("message does not fit the constellation: {0}")]
    InvalidMessage(String),

    /// Exhaustive enumeration requested above the allowed size.
    #[error("constellation too large to enumerate: {size} signals (limit {limit})")]
    EnumerationGuard { size: String, limit: u64 },

    /// The closed-form expression is not defined at this operating point.
    #[error("outside validity region: {0}")]
    Validity(String),

    #[error("opportunity counter would overflow: {trials} trials x {coordinates} coordinates")]
    CounterOverflow { trials: u64, coordinates: u64 },

    #[error("block size 2K = {0} exceeds the codec limit of 34")]
    CodecLimit(usize),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        expected,
    }
}
