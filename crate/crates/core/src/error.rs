use thiserror::Error;

/// Errors raised by the numerical kernels and the constructions built on them.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("divergent integral: {0}")]
    Divergence(String),

    /// An integration hit a singularity (step underflow, blow-up, branch point).
    #[error("singularity near parameter {at}{}", estimate.map(|e| format!(" (blow-up estimate {e})")).unwrap_or_default())]
    Singularity { at: f64, estimate: Option<f64> },

    #[error("point lies on the focal set: {0}")]
    FocalSet(String),

    #[error("no admissible real sheet: {0}")]
    NoSheet(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("contour error: {0}")]
    Contour(String),

    #[error("too close to a coordinate pole (theta = {theta})")]
    Pole { theta: f64 },

    #[error("outside the chart domain: {0}")]
    Domain(String),

    #[error("potential vanishes at {0:?}")]
    ZeroPotential([f64; 3]),

    /// A field evaluation failed at one of the finite-difference stencil points.
    #[error("field evaluation failed at stencil point {at:?}: {source}")]
    Stencil { at: Vec<f64>, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;
