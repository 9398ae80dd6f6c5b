use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("phase error: {0}")]
    Phase(String),

    #[error("excluded disk is not contained in the ellipse")]
    ContainmentViolated,

    #[error("no admissible root: {0}")]
    NoValidRoot(String),

    #[error("point {0} lies within the boundary band; root count {1} is not 2 or 3")]
    BoundaryAmbiguity(Complex64, usize),

    #[error("region does not match the phase of the parameters: {0}")]
    PhaseMismatch(String),

    #[error("variational inequality violated at {point}: margin {margin:e}")]
    InequalityViolated { point: Complex64, margin: f64 },

    #[error("point {0} is too close to the support for a reliable branch choice")]
    Proximity(Complex64),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
