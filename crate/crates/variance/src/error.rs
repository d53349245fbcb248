use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] hqe_core::Error),
    #[error(transparent)]
    Fuchsian(#[from] hqe_fuchsian::Error),
    #[error(transparent)]
    Observables(#[from] hqe_observables::Error),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no eigenvalue in the window [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("eigendata format error: {0}")]
    FormatError(String),
    #[error("Gram matrix deviates from identity by {deviation:e} (tolerance {tol:e})")]
    OrthonormalityViolation { deviation: f64, tol: f64 },
    #[error("mode {mode} has residual {residual:e} above {tol:e}")]
    ResidualViolation { mode: usize, residual: f64, tol: f64 },
    #[error("{unmatched} boundary nodes found no partner within {tol:e}")]
    MeshPairingFailure { unmatched: usize, tol: f64 },
    #[error("eigensolver: {0}")]
    SolverNotConverged(String),
    #[error("eigendata reach ν = {max_nu} but the window needs ν > {needed}")]
    WindowNotResolved { max_nu: f64, needed: f64 },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
