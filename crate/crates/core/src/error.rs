use num_complex::Complex64;
use thiserror::Error;

/// Errors produced while building boundaries, assembling operators, or
/// evaluating the map.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid boundary configuration: {0}")]
    InvalidBoundary(String),

    #[error("node count per curve must be even and at least 4, got {0}")]
    InvalidNodeCount(usize),

    #[error("point {0} lies outside the region")]
    PointOutside(Complex64),

    #[error("point {0} is too close to the boundary for reliable evaluation")]
    PointNearBoundary(Complex64),

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("linear system is ill-conditioned (1-norm condition estimate {0:.3e})")]
    IllConditioned(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
