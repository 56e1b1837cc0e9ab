use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MedianError {
    #[error("empty input: the median of zero values is undefined")]
    Empty,
    #[error("rank {k} out of range for {n} values (ranks are 1-based)")]
    RankOutOfRange { k: usize, n: usize },
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("degenerate data: standard deviation is zero")]
    Degenerate,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("partial counts disagree on bin range or bin count")]
    RangeMismatch,
    #[error("value {0} is not present in the retained data")]
    NotPresent(f64),
    #[error("bin counter would go negative")]
    CounterUnderflow,
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = MedianError> = std::result::Result<T, E>;
