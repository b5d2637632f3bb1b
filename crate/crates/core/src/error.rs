use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parameters not admissible: {0}")]
    Inadmissible(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("tolerance {0:e} outside the supported range")]
    InvalidTolerance(f64),
    #[error("quadrature did not converge: {0}")]
    QuadratureDivergence(String),
    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),
    #[error("singular jacobian at row {0}")]
    SingularJacobian(usize),
    #[error("invalid initial guess: {0}")]
    InvalidGuess(String),
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}
