use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point lies within {tolerance:e} of the projection pole")]
    PoleSingularity { tolerance: f64 },

    #[error("maps or functions use different axes (mismatch {mismatch:e})")]
    AxisMismatch { mismatch: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature with {nodes} nodes cannot resolve degree {degree}")]
    InsufficientNodes { nodes: usize, degree: usize },

    #[error("critical order 2m = n = {n} has no Q-constant normalization")]
    CriticalOrder { n: usize },

    #[error("multiplier vanishes at degree {degree}; operator is not invertible")]
    SingularOperator { degree: usize },

    #[error("function is not positive: minimum {min_value:e} on the check grid")]
    NonPositiveFunction { min_value: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    PrecondViolated(String),

    #[error("function is not supported away from the pole: {max_abs:e} inside the excluded cap")]
    SupportViolation { max_abs: f64 },

    #[error("no negative second-variation eigenvalue in degrees 2 and 3 for n = {n}, m = {m}")]
    NotUnstable { n: usize, m: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
