use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid field spec: {0}")]
    InvalidFieldSpec(String),
    #[error("field too large: {0}")]
    FieldTooLarge(String),
    #[error("extension degree must be at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("modulus is not irreducible")]
    NotIrreducible,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Frobenius index {k} out of range for n = {n}")]
    FrobeniusIndex { k: usize, n: usize },
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("0^0 is undefined")]
    ZeroToZero,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error("gcd(h, q^n - 1) = {gcd} for h = {h}; the power map is not a bijection")]
    NonCoprimeExponent { h: u128, gcd: u128 },
    #[error("retry budget exhausted after {0} attempts")]
    RetryExhausted(usize),
    #[error("symbol {0:#04x} is not in the alphabet")]
    UnknownSymbol(u8),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("incompatible keys: {0}")]
    IncompatibleKeys(String),
    #[error("malformed data: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
