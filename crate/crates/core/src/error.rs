use thiserror::Error;

/// Errors surfaced by every computational route in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PamError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge after {nodes} nodes per axis (last iterates {last:e}, {prev:e})")]
    NonConvergence { nodes: usize, last: f64, prev: f64 },

    #[error("estimated relative error {rel_error:e} exceeds {limit:e}: the contour formula is ill-conditioned here")]
    Inaccurate { rel_error: f64, limit: f64 },

    #[error("pole separation failure: no admissible z2 radius for z1 = {z1}, offending pole at {pole}")]
    PoleSeparation { z1: String, pole: String },

    #[error("contour is not admissible: {0}")]
    Contour(String),

    #[error("window too small: boundary mass {boundary:e} exceeds {limit:e}; try window half-width {suggested}")]
    WindowTooSmall { boundary: f64, limit: f64, suggested: usize },

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("time step too large: clip fraction {fraction:e} exceeds 1e-4; try dt = {suggested_dt:e}")]
    TimeStepTooLarge { fraction: f64, suggested_dt: f64 },

    #[error("degenerate estimator: {0}")]
    Degenerate(String),

    #[error("root bracket not found: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, PamError>;
