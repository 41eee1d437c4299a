//! Shared error type for the numerical routines.

use thiserror::Error;

/// Errors raised by interpolation, compression, pricing and calibration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Array extents are incompatible with the requested operation.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A value lies outside the domain the operation is defined on.
    #[error("domain violation: {0}")]
    Domain(String),
    /// An oracle call failed while building an interpolant.
    #[error("oracle failed at node {node_index} {node:?}: {message}")]
    Oracle {
        node_index: usize,
        node: Vec<f64>,
        message: String,
    },
    /// The requested truncation tolerance cannot be met even untruncated.
    #[error("epsilon {requested:e} unattainable; achievable floor is {floor:e}")]
    ToleranceFloor { requested: f64, floor: f64 },
    /// A simulation produced a non-finite value.
    #[error("non-finite value in {context} at step {step}")]
    NonFinite { context: &'static str, step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
