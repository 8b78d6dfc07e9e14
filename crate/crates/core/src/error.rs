use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension n = {0} is not supported here (need n >= 3, and n = 3 for sphere quadrature)")]
    Dimension(usize),

    #[error("invalid degree: {0}")]
    Degree(String),

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("grid integrates exactly up to degree {exact}, but degree {required} is required")]
    GridTooCoarse { exact: usize, required: usize },

    #[error("point {index} has norm {norm}, expected a unit vector")]
    NonUnitPoint { index: usize, norm: f64 },

    #[error("field has a component of size {size:e} in degree {degree}, which the operator does not accept")]
    ForbiddenComponent { degree: usize, size: f64 },

    #[error("support function is not convex: min eigenvalue {margin:e} of A[h] at node {node}")]
    NotConvex { node: usize, margin: f64 },

    #[error("support function is not positive: h = {value:e} at node {node}")]
    NonPositive { node: usize, value: f64 },

    #[error("matrix is singular (det = {0:e})")]
    Singular(f64),

    #[error("support function is not resolved at the truncation degree: residual {0:e}")]
    Aliasing(f64),

    #[error("inadmissible ellipsoid parameters: {0}")]
    Inadmissible(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
