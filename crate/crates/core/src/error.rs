use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0} did not converge")]
    NonConvergence(&'static str),

    #[error("eigenvalue {eigenvalue} lies on the branch cut of the principal logarithm")]
    BranchCut { eigenvalue: Complex64 },

    #[error("eigenvector matrix condition number {condition:e} exceeds {limit:e}")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("trace drifted by {drift:e} at t = {time} (step too large)")]
    TraceDrift { time: f64, drift: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
