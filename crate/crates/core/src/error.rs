use alloc::string::String;
use num_complex::Complex64;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {at} outside the domain of {what}")]
    Domain { what: &'static str, at: Complex64 },

    #[error("pole of the stopped characteristic function at {at}")]
    Pole { at: Complex64 },

    #[error("grid too small: end sample magnitude {end} exceeds {limit}")]
    GridTooSmall { end: f64, limit: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("root finding failed for a degree {degree} polynomial (residual {residual:e})")]
    RootFinding { degree: usize, residual: f64 },

    #[error("factorization impossible: {0}")]
    FactorizationImpossible(String),

    #[error("factor is not normalized: value at the origin is {value}")]
    NotNormalized { value: f64 },

    #[error("factor vanishes at the origin")]
    ZeroAtOrigin,

    #[error("approximant is not positive-definite: {0}")]
    NotPositiveDefinite(String),

    #[error("density side mismatch")]
    SideMismatch,

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = core::result::Result<T, Error>;
