use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("at most {max} qubits are supported, got {requested}")]
    TooManyQubits { requested: usize, max: usize },

    #[error("invalid Pauli letter {0:?} (expected one of I, X, Y, Z)")]
    InvalidLetter(char),

    #[error("branch product requested for commuting strings {p} and {g}")]
    CommutingBranch { p: String, g: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("parameter count mismatch: circuit has {expected} parameters, got {found}")]
    ParamCount { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Lanczos did not converge within {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("relative error undefined for a zero reference energy")]
    UndefinedMetric,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite cost or gradient at iteration {iteration}")]
    NonFinite { iteration: usize, trajectory: Box<crate::optim::Trajectory> },
}

pub type Result<T> = std::result::Result<T, Error>;
