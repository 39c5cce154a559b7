use thiserror::Error;

#[derive(Error, Debug)]
pub enum SymError {
    #[error("invalid space spec: {0}")]
    InvalidSpec(String),
    #[error("product factors have opposite signs")]
    SignMismatch,
    #[error("operation needs dimension >= 4, model has n = {n}")]
    DimensionTooSmall { n: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("Casimir operator is not scalar on block {block}")]
    NotScalarOnBlock { block: usize },
    #[error("operation requires an irreducible model; run it per de Rham block")]
    NotIrreducible,
    #[error("no regular element found after {tries} seeded attempts")]
    RegularElementNotFound { tries: usize },
    #[error("eigenvalues need more than one square root: {0}")]
    IrrationalBeyondQuadratic(String),
    #[error("a rational entry has denominator divisible by the prime {p}")]
    DenominatorDivisibleByPrime { p: u64 },
    #[error("mixed quadratic extensions: {what}")]
    MixedExtensions { what: String },
    #[error("index out of range: {what}")]
    IndexOutOfRange { what: String },
    #[error("construction invariant failed: {0}")]
    ConstructionInvalid(String),
    #[error("modular nullities disagree across primes: {0} vs {1}")]
    ModularDisagreement(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SymError>;
