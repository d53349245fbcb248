use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("quadrature for {what} did not converge (last change {delta:e})")]
    QuadratureNotConverged { what: &'static str, delta: f64 },
    #[error("series diverged: tail estimate {tail:e} at l_max = {l_max}")]
    SeriesDiverged { tail: f64, l_max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
