use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("DegenerateLattice: periods are (numerically) linearly dependent over the reals, |Im(p2/p1)| = {im_omega:e}")]
    DegenerateLattice { im_omega: f64 },

    #[error("AccuracyNotMet: {0}")]
    AccuracyNotMet(String),

    #[error("PoleOrZeroHit: sigma argument {0} lies on the lattice")]
    PoleOrZeroHit(Complex64),

    #[error("AbelViolation: zeros and poles are unbalanced or their sums differ by {defect} (not a lattice vector)")]
    AbelViolation { defect: Complex64 },

    #[error("UnbalancedDivisor: {zeros} zeros but {poles} poles")]
    UnbalancedDivisor { zeros: usize, poles: usize },

    #[error("IllConditioned: exponent system determinant {determinant:e} is too small")]
    IllConditioned { determinant: f64 },

    #[error("TooManyPoleHits: could not place a sample away from zeros and poles near {0}")]
    TooManyPoleHits(Complex64),

    #[error("ContourTooClose: no contour offset kept the cell boundary away from zeros and poles")]
    ContourTooClose,

    #[error("Overflow: log-magnitude {0} does not fit a double")]
    Overflow(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("IoFailure: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateLattice { .. }
            | Error::AbelViolation { .. }
            | Error::UnbalancedDivisor { .. }
            | Error::InvalidInput(_)
            | Error::Json(_) => 1,
            Error::AccuracyNotMet(_)
            | Error::PoleOrZeroHit(_)
            | Error::IllConditioned { .. }
            | Error::TooManyPoleHits(_)
            | Error::ContourTooClose
            | Error::Overflow(_) => 2,
            Error::Io(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
