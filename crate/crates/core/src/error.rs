use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("binomial coefficient C({0}, {1}) does not fit in 64 bits")]
    BinomialOverflow(u64, i64),

    #[error("invalid symmetric label: j = {j}, n = {n}")]
    InvalidLabel { j: usize, n: usize },

    #[error("{n} qubits exceeds the exhaustive-mode capacity of {max}")]
    Capacity { n: usize, max: usize },

    #[error("subset size {m} must satisfy 1 <= m <= n - 1 for n = {n}")]
    InvalidSubset { m: usize, n: usize },

    #[error("atom index {index} out of range for {count} atoms")]
    AtomIndex { index: usize, count: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("basis state is outside the truncated space")]
    OutsideSpace,

    #[error("cannot condition on an outcome of zero probability")]
    ZeroProbability,

    #[error("cannot produce {clones} clones from {originals} originals")]
    InvalidCloneCount { originals: usize, clones: usize },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("{0}")]
    Io(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
