use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("duplicate value at positions {0} and {1}")]
    DuplicateValue(usize, usize),
    #[error("not a permutation of 1..={n}: {detail}")]
    NotPermutation { n: usize, detail: String },
    #[error("index {index} out of range for size {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("index set must be non-empty and strictly increasing")]
    BadIndexSet,
    #[error("invalid pattern: {0}")]
    BadPattern(String),
    #[error("permutation leaves the class at prefix length {prefix}")]
    NotInClass { prefix: usize },
    #[error("labels at positions {pos} and {} are not parent and child", pos + 1)]
    InconsistentLabels { pos: usize },
    #[error("walk must start at the origin")]
    WalkNotRooted,
    #[error("size {n} exceeds the exact sampler budget {max}; use the Monte Carlo sampler instead")]
    OverBudget { n: usize, max: usize },
    #[error("rejection sampler gave up after {attempts} attempts")]
    AttemptsExhausted { attempts: u64 },
    #[error("grid resolutions differ: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("size must be at least 1")]
    EmptySize,
    #[error("{0}")]
    Invalid(String),
}
