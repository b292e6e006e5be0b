use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("numerical failure on {dim}x{dim} matrix: {what}")]
    NumericalFailure { dim: usize, what: String },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below -{threshold:e}")]
    NotPsd { eigenvalue: f64, threshold: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("row counts differ: {left} vs {right}")]
    Pairing { left: usize, right: usize },

    #[error("non-finite value in {table} at row {row}")]
    NonFiniteData { table: &'static str, row: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("x-marginals differ: {0}")]
    RestrictionViolated(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for errors that come from the numerics rather than from the
    /// caller's data.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalFailure { .. } | Error::NotPsd { .. })
    }
}
