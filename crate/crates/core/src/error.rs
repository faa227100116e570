use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("outside the regime where this quantity is defined: {0}")]
    OutOfRegime(String),

    #[error("index {index} out of range (size {size})")]
    OutOfRange { index: u64, size: u64 },

    #[error("mismatched subsets: {0}")]
    Mismatch(String),

    #[error("exact integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("{what} exceeded budget of {budget}")]
    Budget { what: &'static str, budget: u64 },

    #[error("sampler rejected {0} consecutive duplicate edges")]
    DuplicateCap(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
