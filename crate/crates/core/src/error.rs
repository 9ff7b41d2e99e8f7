use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("corner function evaluated at the singular corner point (x = {x}, t = 0)")]
    CornerPoint { x: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid problem data: {0}")]
    InvalidData(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("boundary rows inconsistent with the Dirichlet lift at t = {t}: deviation {deviation:e}")]
    InconsistentBoundary { t: f64, deviation: f64 },

    #[error("solution diverged at t = {t}: max |v| = {max_abs:e}")]
    Divergence { t: f64, max_abs: f64 },

    #[error("time step {dt} violates the advective bound {bound}")]
    StepSize { dt: f64, bound: f64 },

    #[error("S1 closed form deviates from quadrature by {deviation:e} at (x = {x}, t = {t})")]
    ClosedFormMismatch { x: f64, t: f64, deviation: f64 },

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),
}

pub type Result<T> = std::result::Result<T, Error>;
