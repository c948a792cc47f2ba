use thiserror::Error;

pub type Result<T> = std::result::Result<T, MoyalError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoyalError {
    #[error("invalid context: {0}")]
    InvalidContext(String),

    #[error("operands were built on different Fock contexts")]
    ContextMismatch,

    #[error("index {index} outside the safe range 0..{limit}")]
    OutOfRange { index: usize, limit: usize },

    #[error("leakage {leakage:.3e} exceeds bound {bound:.3e}")]
    Leakage { leakage: f64, bound: f64 },

    #[error("repeated index {0} in superposition")]
    RepeatedIndex(usize),

    #[error("superposition vector is zero")]
    ZeroVector,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("state is not diagonal in the number basis (off-diagonal mass {0:.3e})")]
    NonDiagonal(f64),

    #[error("symbol fails decay certification: boundary value {value:.3e} > {threshold:.3e}")]
    DecayCertification { value: f64, threshold: f64 },

    #[error("point ({0}, {1}) is not an interior grid node")]
    OutsideGrid(f64, f64),

    #[error("index constraint violated: {0}")]
    IndexConstraint(String),

    #[error("truncation {dim} exceeds the length-operator budget {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("seminorm vanishes along a direction with nonzero objective {0:.3e}")]
    DegenerateSeminorm(f64),

    #[error("internal Dirac entry must be nonzero")]
    ZeroLambda,

    #[error("empty parameter grid")]
    EmptyGrid,
}
