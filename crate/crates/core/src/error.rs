//! Errors shared across the crate.

use crate::cochain::Configuration;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CcError>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum CcError {
    /// Two bodies closer than the collision tolerance (or an exactly zero
    /// difference vector). Indices are 0-based.
    #[error("collision between bodies {i} and {j} (distance {distance:.3e})")]
    Collision { i: usize, j: usize, distance: f64 },

    #[error("dimension mismatch: {context} (expected {expected}, found {found})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid masses: {0}")]
    InvalidMasses(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Degenerate input where a nonzero norm or gradient was required.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Iteration budget exhausted; carries the best iterate seen.
    #[error("no convergence after {iterations} iterations (residual {residual_norm:.3e})")]
    NoConvergence {
        iterations: usize,
        residual_norm: f64,
        best: Box<Configuration>,
    },

    /// Input to `hessian_composed` was not a cocycle.
    #[error("input is not a 1-cocycle: |delta^1 z| = {coboundary_norm:.3e} exceeds tolerance")]
    NotCocycle { coboundary_norm: f64 },

    /// Operator handed to `spectrum` was not symmetric.
    #[error("operator not symmetric: relative asymmetry {asymmetry:.3e}")]
    NotSymmetric { asymmetry: f64 },
}
