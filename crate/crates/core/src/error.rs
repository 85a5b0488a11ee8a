use thiserror::Error;

/// Failure classes. The CLI maps [`ErrorClass::Precondition`] to exit code 2
/// and [`ErrorClass::Solver`] to exit code 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Precondition,
    Solver,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("coefficient table is not conjugate-symmetric (defect {0:.3e})")]
    ConjugateSymmetry(f64),
    #[error("coefficient range {have} insufficient, need {need}")]
    InsufficientRange { have: usize, need: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error("quadrature resolution: {0}")]
    QuadratureResolution(String),
    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),
    #[error("not invertible on window: {0}")]
    NotInvertible(String),
    #[error("cut-off: {0}")]
    Cutoff(String),
    #[error("point lies on the curve (distance {0:.3e})")]
    OnCurve(f64),
    #[error("eigenvector outside the space: |z| = {0}")]
    OutsideSpace(f64),
    #[error("regularization failure: {0}")]
    Regularization(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::SolverFailure(_) | Error::Regularization(_) | Error::QuadratureResolution(_) => {
                ErrorClass::Solver
            }
            _ => ErrorClass::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
