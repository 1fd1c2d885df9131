use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric")]
    Asymmetric,

    #[error("matrix is not unimodular: determinant is {residue} mod {prime}")]
    NotUnimodular { residue: u64, prime: u64 },

    #[error("cyclotomic modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("structural violation: {0}")]
    Structural(String),

    #[error("coefficient growth: {bits}-bit entries after {pivots} pivots exceed the {budget}-bit budget")]
    CoefficientGrowth { bits: u64, pivots: usize, budget: u64 },

    #[error("refused: {0}")]
    ResourceCap(String),

    #[error("malformed matrix data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
