//! Error type of the numeric checks.

use thiserror::Error;

/// Failures of the matrix constructions and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HolonomyError {
    /// A matrix that should be unitary is not (to `1e−9`).
    #[error("matrix is not unitary: ‖U*U − I‖∞ = {residual:e}")]
    NotUnitary {
        /// `‖U*U − I‖∞`.
        residual: f64,
    },
    /// A matrix that should lie in SO(2n+1) does not (to `1e−9`).
    #[error("matrix is not special orthogonal: ‖MᵀM − I‖∞ = {residual:e}, det = {det}")]
    NotSpecialOrthogonal {
        /// `‖MᵀM − I‖∞`.
        residual: f64,
        /// The determinant.
        det: f64,
    },
    /// Matrices or indices of incompatible sizes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A form specification that does not fit the rank.
    #[error("invalid form: {0}")]
    InvalidForm(String),
}

/// Result alias.
pub type Result<T> = std::result::Result<T, HolonomyError>;
