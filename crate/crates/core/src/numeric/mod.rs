//! Floating-point cross-checks of exact certificates.

mod gaussian;
mod grid;
mod quadrature;

pub use gaussian::{
    gaussian_ascent, gaussian_ratio, log_gaussian_ratio, log_ratio_gradient, surjective_forms, AscentOptions, AscentResult,
    GaussianInput,
};
pub use grid::{grid_factorize, FactorizeReport, GridFunction};
pub use quadrature::{quadrature_check, BoxGrid, QuadratureResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("matrix for map {map} is not symmetric positive definite")]
    NotPositiveDefinite { map: usize },
    #[error("expected {expected}, found {found}")]
    Shape { expected: String, found: String },
    #[error("vertex {vertex} is not a coordinate subspace")]
    NonCoordinate { vertex: usize },
    #[error("weight is not a balanced scalar weight: {0}")]
    Weight(String),
    #[error("quadrature supports dimension at most 3, got {0}")]
    DimensionTooLarge(usize),
    #[error("no grid covers axis {axis} of the domain")]
    UnboundedSupport { axis: usize },
    #[error("grid file line {line}: {reason}")]
    GridParse { line: usize, reason: String },
}
