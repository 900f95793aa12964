use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("s-box too small: {0}; enlarge the search box")]
    SBoxTooSmall(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("length mismatch: basis has {expected} functions, got {got} coefficients")]
    LengthMismatch { expected: usize, got: usize },

    #[error("degenerate polynomial: all coefficients are zero")]
    DegeneratePolynomial,

    #[error("root finder did not converge after {restarts} restarts")]
    RootNonConvergence { restarts: usize },

    #[error("argument principle failed: {0}")]
    Winding(String),

    #[error("restriction vanishes identically on sampled lines: {0}")]
    VanishingSlice(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("reference mismatch: {0}")]
    ReferenceMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(_)
                | Error::RootNonConvergence { .. }
                | Error::Winding(_)
                | Error::VanishingSlice(_)
                | Error::SBoxTooSmall(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
