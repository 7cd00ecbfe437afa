use thiserror::Error;

/// Errors raised by the decomposition pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("occupation pole at omega = 0 (bosonic statistics require J(0) = 0)")]
    Pole,

    #[error("quadrature did not converge: worst sample change {worst:.3e} exceeds tolerance {tol:.3e} after {refinements} refinements")]
    QuadratureNotConverged {
        worst: f64,
        tol: f64,
        refinements: usize,
    },

    #[error("error-metric grid did not converge: relative change {change:.3e} after {doublings} doublings")]
    GridNotConverged { change: f64, doublings: usize },

    #[error("eigensolver did not converge: {0}")]
    EigenNotConverged(String),

    #[error("degenerate polynomial: all coefficients below {threshold:.3e}")]
    DegeneratePolynomial { threshold: f64 },

    #[error("root finder did not converge after {iterations} iterations at degree {degree}")]
    RootsNotConverged { iterations: usize, degree: usize },

    #[error("root w = 0 has no finite decay exponent")]
    ZeroRoot,

    #[error("roots are not distinct: minimum separation {0:.3e}")]
    DuplicateRoots(f64),

    #[error("unsupported spectral density: {0}")]
    UnsupportedDensity(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),
}

impl Error {
    /// Coarse category used by front ends to pick exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidInput(_) | Error::Domain(_) => ErrorCategory::Input,
            Error::UnsupportedDensity(_) | Error::Unsupported(_) | Error::Pole => {
                ErrorCategory::Unsupported
            }
            _ => ErrorCategory::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Input,
    Numerical,
    Unsupported,
}

pub type Result<T> = std::result::Result<T, Error>;
