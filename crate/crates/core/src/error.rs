use thiserror::Error;

/// Errors raised by the series engine and the constant-term pipelines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} does not fit the word-sized field arithmetic (must be below 2^32)")]
    ModulusTooLarge(u64),
    #[error("transform length 2^{needed} exceeds the 2-adic capacity 2^{available} of the field")]
    NoFFTSupport { needed: u32, available: u32 },
    #[error("prime {0} appears more than once")]
    DuplicatePrime(u64),
    #[error("series belong to different fields or truncation orders")]
    Mismatch,
    #[error("characteristic {p} too small for truncation order {d}")]
    CharTooSmall { p: u64, d: usize },
    #[error("constant term is not invertible")]
    NotInvertibleConstantTerm,
    #[error("constant term must be 1")]
    ConstantTermNotOne,
    #[error("constant term must be 0")]
    ConstantTermNotZero,
    #[error("series is not regular in y: coefficient of s^{n} has a monomial of degree {degree}")]
    NotRegular { n: usize, degree: usize },
    #[error("prime {p} is unsuitable: {reason}")]
    UnsuitablePrime { p: u64, reason: String },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("no valid substitution vector found after {attempts} attempts")]
    NoValidGamma { attempts: usize },
    #[error("substitution vector is invalid: term {term}, factor {factor} vanishes")]
    InvalidGamma { term: usize, factor: usize },
    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("factor 1 - t^0 has a zero exponent")]
    ZeroExponentFactor,
    #[error("sum has no terms")]
    EmptySum,
    #[error("search exceeded the upper bound {bound} without finding a nonzero coefficient")]
    Unbounded { bound: i64 },
    #[error("search space of {nodes} nodes exceeds the limit {limit}")]
    SearchSpaceTooLarge { nodes: u64, limit: u64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
