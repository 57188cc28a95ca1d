use thiserror::Error;

/// Errors raised by the solver library and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected} nodes, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("value {value} outside the admissible domain of the {potential} potential")]
    Domain { potential: &'static str, value: f64 },

    #[error("auxiliary exponent s - E1h = {exponent} overflows (scheme diverged)")]
    Overflow { exponent: f64 },

    #[error("maximum bound violated: sup-norm {sup} exceeds bound {beta}")]
    MbpViolation { sup: f64, beta: f64 },

    #[error("extrapolation predictor requires a previous step")]
    MissingHistory,

    #[error("dense assembly refused for N = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("time step {tau} exceeds the maximum-bound restriction {max_tau}")]
    TimeStepTooLarge { tau: f64, max_tau: f64 },

    #[error("conjugate gradient did not converge in {iterations} iterations (residual {residual})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
