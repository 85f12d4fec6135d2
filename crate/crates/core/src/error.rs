use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("query budget exhausted")]
    BudgetExhausted,
    #[error("unbounded region")]
    Unbounded,
    #[error("empty polytope")]
    EmptyPolytope,
    #[error("point outside the simplex: {0:?}")]
    OutsideSimplex(Vec<f64>),
    #[error("degenerate neighborhood exhausted")]
    DegenerateNeighborhood,
    #[error("fixed point not found at resolution {0}")]
    FixedPointNotFound(f64),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
