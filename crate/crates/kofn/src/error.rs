use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("element {index} out of range for ground set of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration of binom({n},{k}) = {count} configurations exceeds cap {cap}")]
    EnumerationCap {
        n: usize,
        k: usize,
        count: String,
        cap: u64,
    },

    #[error("weight mismatch: |x| = {left} but |y| = {right}; matchings are undefined")]
    WeightMismatch { left: usize, right: usize },

    #[error("decision tree contract violated: {0}")]
    TreeContract(String),

    #[error("exploration walker left its domain: {0}")]
    Exploration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
