//! Valid presentations: graph certificates of finiteness for
//! Hölder–Brascamp–Lieb inequalities.

pub mod builder;
pub mod cli;
pub mod datum;
pub mod fixtures;
pub mod io;
pub mod flow;
pub mod linalg;
pub mod numeric;
pub mod presentation;
pub mod random;
pub mod rational;

pub use datum::{CandidateLattice, HblDatum, NamedMap};
pub use flow::{GraphDecomposition, WeightFunction};
pub use linalg::{Matrix, Subspace};
pub use presentation::{verify_presentation, Presentation};
pub use rational::Rational;
