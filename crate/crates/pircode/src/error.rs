use thiserror::Error;

/// Errors reported by the kernel.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ring spec: {0}")]
    InvalidRing(String),

    #[error("ring mismatch between operands")]
    RingMismatch,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("{0} is not divisible by {1}")]
    NotDivisible(String, String),

    #[error("empty generator list")]
    EmptyGenerators,

    #[error("generator lies outside the ambient module")]
    OutsideAmbient,

    #[error("enumeration cap exceeded: {needed} > {cap}")]
    CapExceeded { needed: u128, cap: u128 },

    #[error("not a finite chain ring: {0}")]
    NotChainRing(String),

    #[error("a code needs at least two words")]
    SingletonCode,

    #[error("unsupported embedding: {0}")]
    UnsupportedEmbedding(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
