use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by model construction, evaluation and integration.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not traceless (|tr| = {trace:e}, tolerance {tolerance:e})")]
    NotTraceless { trace: f64, tolerance: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid modulus tau = {0}: Im(tau) must be positive")]
    InvalidTau(Complex64),

    /// Evaluation within the pole threshold of a pole. For Weierstrass
    /// functions `sigma` carries the (finite) value of the entire function.
    #[error("argument {z} lies on a pole (distance {distance:e})")]
    Pole {
        z: Complex64,
        distance: f64,
        sigma: Option<Complex64>,
    },

    #[error("resonant configuration: root value {value} is within {distance:e} of a lattice point")]
    Resonant { value: Complex64, distance: f64 },

    #[error("coincident points: {0}")]
    CoincidentPoints(String),

    #[error("point {0} is congruent to the gluing point 0")]
    PointAtOrigin(Complex64),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation requires genus {expected} model")]
    WrongGenus { expected: u8 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
