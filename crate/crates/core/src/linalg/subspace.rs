use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Zero};

use super::matrix::{dot, Matrix};
use super::LinalgError;
use crate::rational::{format_rational, Rational};

/// A rational subspace of ℝᵐ stored by the unique RREF of its basis.
///
/// Two `Subspace` values are equal exactly when they span the same space,
/// so `==`, `Hash` and `Ord` all operate on the canonical representation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    /// Row space of `generators` in canonical form.
    pub fn span(ambient: usize, generators: &Matrix) -> Result<Self, LinalgError> {
        if generators.cols() != ambient {
            return Err(LinalgError::DimensionMismatch {
                expected: ambient,
                found: generators.cols(),
            });
        }
        let (basis, pivots) = generators.rref();
        Ok(Subspace {
            ambient,
            basis,
            pivots,
        })
    }

    pub fn from_vectors(ambient: usize, vectors: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        Self::span(ambient, &Matrix::from_rows(ambient, vectors)?)
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Matrix::zeros(0, ambient),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Matrix::identity(ambient),
            pivots: (0..ambient).collect(),
        }
    }

    /// Span of the listed standard basis vectors (0-based).
    pub fn coordinate(ambient: usize, axes: &[usize]) -> Self {
        let vectors = axes
            .iter()
            .map(|&a| {
                let mut v = vec![Rational::zero(); ambient];
                v[a] = Rational::one();
                v
            })
            .collect();
        Self::from_vectors(ambient, vectors).expect("axis within ambient")
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Coordinates of `v` in the RREF basis, or `None` if `v` is not in the span.
    ///
    /// With an RREF basis the coordinates are just the entries of `v` at the pivot columns.
    pub fn coordinates(&self, v: &[Rational]) -> Option<Vec<Rational>> {
        if v.len() != self.ambient {
            return None;
        }
        let coords: Vec<Rational> = self.pivots.iter().map(|&p| v[p].clone()).collect();
        let mut rebuilt = vec![Rational::zero(); self.ambient];
        for (c, row) in coords.iter().zip(0..self.dim()) {
            if c.is_zero() {
                continue;
            }
            for (x, b) in rebuilt.iter_mut().zip(self.basis.row(row)) {
                *x += c * b;
            }
        }
        (rebuilt == v).then_some(coords)
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient
            && (0..self.dim()).all(|i| other.contains(self.basis.row(i)))
    }

    /// Span of `map · b` over the basis rows `b`.
    pub fn image(&self, map: &Matrix) -> Result<Subspace, LinalgError> {
        if map.cols() != self.ambient {
            return Err(LinalgError::DimensionMismatch {
                expected: map.cols(),
                found: self.ambient,
            });
        }
        // (map · Bᵀ)ᵀ = B · mapᵀ has the images as rows.
        let gens = self.basis.mul(&map.transpose())?;
        Subspace::span(map.rows(), &gens)
    }

    pub fn kernel(map: &Matrix) -> Subspace {
        let vectors = map.nullspace();
        Subspace::from_vectors(map.cols(), vectors).expect("nullspace has map width")
    }

    /// Preimage `{x : map·x ∈ self}` of a subspace of the codomain.
    pub fn preimage(&self, map: &Matrix) -> Result<Subspace, LinalgError> {
        if map.rows() != self.ambient {
            return Err(LinalgError::DimensionMismatch {
                expected: map.rows(),
                found: self.ambient,
            });
        }
        let normals = self.orthogonal_complement();
        Ok(Subspace::kernel(&normals.basis.mul(map)?))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check_ambient(other)?;
        Subspace::span(self.ambient, &self.basis.vstack(&other.basis)?)
    }

    /// Computed as `(U⊥ + W⊥)⊥`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check_ambient(other)?;
        Ok(self
            .orthogonal_complement()
            .sum(&other.orthogonal_complement())?
            .orthogonal_complement())
    }

    pub fn orthogonal_complement(&self) -> Subspace {
        Subspace::kernel(&self.basis)
    }

    /// Orthogonal projector `Bᵀ(BBᵀ)⁻¹B`.
    pub fn projection_matrix(&self) -> Matrix {
        if self.is_zero() {
            return Matrix::zeros(self.ambient, self.ambient);
        }
        let b = &self.basis;
        let bt = b.transpose();
        let gram_inv = b
            .mul(&bt)
            .expect("square gram")
            .inverse()
            .expect("independent basis has invertible gram matrix");
        bt.mul(&gram_inv)
            .and_then(|m| m.mul(b))
            .expect("shapes agree")
    }

    /// Projector onto the orthogonal complement, `I − P`.
    pub fn complement_projection_matrix(&self) -> Matrix {
        Matrix::identity(self.ambient).sub(&self.projection_matrix())
    }

    fn check_ambient(&self, other: &Subspace) -> Result<(), LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::AmbientMismatch {
                left: self.ambient,
                right: other.ambient,
            });
        }
        Ok(())
    }

    /// Squared Euclidean norm of a vector.
    pub fn norm_squared(v: &[Rational]) -> Rational {
        dot(v, v)
    }
}

impl Ord for Subspace {
    /// Ambient, then dimension, then pivot columns, then basis entries.
    fn cmp(&self, other: &Self) -> Ordering {
        self.ambient
            .cmp(&other.ambient)
            .then(self.dim().cmp(&other.dim()))
            .then_with(|| self.pivots.cmp(&other.pivots))
            .then_with(|| self.basis.entries().cmp(other.basis.entries()))
    }
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "{{0}}");
        }
        if self.is_full() {
            return write!(f, "R^{}", self.ambient);
        }
        let rows: Vec<String> = (0..self.dim())
            .map(|i| describe_vector(self.basis.row(i)))
            .collect();
        write!(f, "span{{{}}}", rows.join(", "))
    }
}

/// Renders `(0,1,0)` as `e2` and `(1,0,1)` as `e1+e3`, falling back to a tuple.
pub fn describe_vector(v: &[Rational]) -> String {
    let mut terms = Vec::new();
    for (i, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let coef = if x.is_one() {
            "+".to_string()
        } else if *x == -Rational::one() {
            "-".to_string()
        } else {
            return format!(
                "({})",
                v.iter().map(format_rational).collect::<Vec<_>>().join(",")
            );
        };
        terms.push(format!("{coef}e{}", i + 1));
    }
    let s = terms.concat();
    s.strip_prefix('+').map(str::to_string).unwrap_or(s)
}
