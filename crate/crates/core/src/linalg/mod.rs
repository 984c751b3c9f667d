//! Exact linear algebra over ℚ: dense matrices and canonical subspaces.

mod matrix;
mod subspace;

pub use matrix::{dot, Matrix};
pub use subspace::{describe_vector, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subspaces live in different ambient spaces (R^{left} vs R^{right})")]
    AmbientMismatch { left: usize, right: usize },
    #[error("ragged matrix: expected {expected} entries, found {found}")]
    Ragged { expected: usize, found: usize },
}
