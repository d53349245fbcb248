use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] hqe_core::Error),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("orbit enumeration passed the element cap {cap}")]
    BudgetExceeded { cap: usize },
    #[error("no transitive cover of degree {degree} after {attempts} draws")]
    NonTransitive { degree: usize, attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
