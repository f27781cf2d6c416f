//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by parameter derivation, instance generation, and the
/// evaluation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An input vector had the wrong length for the model dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Derived or overridden parameters violate the feasibility constraints
    /// (for example `s >= F`, or an empty odd-integer draw range).
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),

    /// Instance generation could not satisfy the requested constraints.
    #[error("infeasible instance: {0}")]
    InfeasibleInstance(String),

    /// A dense-grid oracle was asked for a grid above the desk-scale guard.
    #[error("grid too large: {0}")]
    GridTooLarge(String),

    /// A state the math says cannot occur.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
