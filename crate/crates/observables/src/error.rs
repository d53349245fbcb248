use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] hqe_core::Error),
    #[error(transparent)]
    Fuchsian(#[from] hqe_fuchsian::Error),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("finite-difference stencil of width {step:e} at |z| = {radius} leaves the disc")]
    StencilOutOfDomain { radius: f64, step: f64 },
    #[error("Monte Carlo budget {cap} exceeded (requested {requested})")]
    BudgetExceeded { requested: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
