use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid parameters: {0}")]
    BadParameters(String),

    #[error("Hensel lifting failed: {0}")]
    HenselFailure(String),

    #[error("coefficient type cannot hold residues mod {p}^{precision}")]
    CoefficientOverflow { p: u64, precision: u32 },

    #[error("operands belong to different contexts")]
    ContextMismatch,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("precision exhausted: need at least {needed} p-adic digits, have {available}")]
    PrecisionExhausted { needed: u32, available: u32 },

    #[error("matrix is singular at the working precision")]
    SingularAtPrecision,

    #[error("crystal is not isoclinic")]
    NotIsoclinic,

    #[error("summand slopes out of order: {0} > {1}")]
    SlopeOrderViolated(String, String),

    #[error("rescaling by p^{0} leaves non-integral entries")]
    NonIntegralRescale(i64),

    #[error("permutation is not a single cycle")]
    NotACycle,

    #[error("rank {0} is too small for this family")]
    RankTooSmall(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
