//! The exponent polytope cut out by a finite family of subspaces.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::datum::{DatumError, HblDatum};
use crate::linalg::{dot, Matrix, Subspace};
use crate::rational::{format_rational, int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtLeast,
    Equal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowSource {
    Subspace(Subspace),
    LowerBound(usize),
    UpperBound(usize),
}

/// `coeffs · τ (≥ | =) rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
    pub relation: Relation,
    pub source: RowSource,
}

impl Constraint {
    pub fn value(&self, tau: &[Rational]) -> Rational {
        dot(&self.coeffs, tau)
    }

    pub fn satisfied(&self, tau: &[Rational]) -> bool {
        let v = self.value(tau);
        match self.relation {
            Relation::AtLeast => v >= self.rhs,
            Relation::Equal => v == self.rhs,
        }
    }

    pub fn tight(&self, tau: &[Rational]) -> bool {
        self.value(tau) == self.rhs
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                if c.is_one() {
                    format!("t{}", i + 1)
                } else {
                    format!("{}*t{}", format_rational(c), i + 1)
                }
            })
            .collect();
        let lhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        let rel = match self.relation {
            Relation::AtLeast => ">=",
            Relation::Equal => "=",
        };
        write!(f, "{lhs} {rel} {}", format_rational(&self.rhs))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentPolytope {
    pub n: usize,
    pub constraints: Vec<Constraint>,
}

/// One `≥` row per proper nonzero candidate, the `=` row for the full
/// space, and the box `0 ≤ τᵢ ≤ 1`. Rows with identical content are merged
/// (the first provenance is kept).
pub fn polytope_from_candidates(datum: &HblDatum, candidates: &[Subspace]) -> Result<ExponentPolytope, DatumError> {
    let n = datum.len();
    let mut constraints: Vec<Constraint> = Vec::new();
    let full = datum.full();
    let mut subspace_rows = vec![full.clone()];
    subspace_rows.extend(candidates.iter().filter(|v| !v.is_zero() && **v != full).cloned());
    for v in subspace_rows {
        let dims = datum.image_dims(&v)?;
        let row = Constraint {
            coeffs: dims.iter().map(|&d| int(d as i64)).collect(),
            rhs: int(v.dim() as i64),
            relation: if v.is_full() { Relation::Equal } else { Relation::AtLeast },
            source: RowSource::Subspace(v),
        };
        push_unique(&mut constraints, row);
    }
    for i in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[i] = Rational::one();
        push_unique(
            &mut constraints,
            Constraint {
                coeffs: e.clone(),
                rhs: Rational::zero(),
                relation: Relation::AtLeast,
                source: RowSource::LowerBound(i),
            },
        );
        push_unique(
            &mut constraints,
            Constraint {
                coeffs: e.iter().map(|x| -x).collect(),
                rhs: -Rational::one(),
                relation: Relation::AtLeast,
                source: RowSource::UpperBound(i),
            },
        );
    }
    Ok(ExponentPolytope { n, constraints })
}

fn push_unique(rows: &mut Vec<Constraint>, row: Constraint) {
    if !rows
        .iter()
        .any(|r| r.coeffs == row.coeffs && r.rhs == row.rhs && r.relation == row.relation)
    {
        rows.push(row);
    }
}

impl ExponentPolytope {
    pub fn first_violated(&self, tau: &[Rational]) -> Option<&Constraint> {
        self.constraints.iter().find(|c| !c.satisfied(tau))
    }

    pub fn contains(&self, tau: &[Rational]) -> bool {
        tau.len() == self.n && self.first_violated(tau).is_none()
    }

    fn tight_rows(&self, tau: &[Rational]) -> Vec<usize> {
        (0..self.constraints.len())
            .filter(|&k| self.constraints[k].tight(tau))
            .collect()
    }

    fn matrix_of(&self, rows: &[usize]) -> Matrix {
        Matrix::from_rows(self.n, rows.iter().map(|&k| self.constraints[k].coeffs.clone()).collect())
            .expect("rows have width n")
    }

    /// Rank of the constraints tight at `tau`; `n` means `tau` is a vertex.
    pub fn tight_rank(&self, tau: &[Rational]) -> usize {
        self.matrix_of(&self.tight_rows(tau)).rank()
    }

    pub fn is_extreme(&self, tau: &[Rational]) -> bool {
        self.contains(tau) && self.tight_rank(tau) == self.n
    }

    /// Nonzero direction keeping every tight row tight, if one exists.
    fn free_direction(&self, tau: &[Rational]) -> Option<Vec<Rational>> {
        self.matrix_of(&self.tight_rows(tau)).nullspace().into_iter().next()
    }

    /// Largest `t ≥ 0` with `tau + t·dir` feasible, or `None` if unbounded.
    fn max_step(&self, tau: &[Rational], dir: &[Rational]) -> Option<Rational> {
        let mut best: Option<Rational> = None;
        for c in &self.constraints {
            let rate = dot(&c.coeffs, dir);
            if !rate.is_negative() {
                continue;
            }
            let room = c.value(tau) - &c.rhs;
            let t = room / -rate;
            if best.as_ref().is_none_or(|b| t < *b) {
                best = Some(t);
            }
        }
        best
    }

    /// A vertex of the smallest face containing `tau`.
    fn vertex_of_face(&self, tau: &[Rational]) -> Vec<Rational> {
        let mut x = tau.to_vec();
        while let Some(dir) = self.free_direction(&x) {
            let (dir, t) = match self.max_step(&x, &dir) {
                Some(t) => (dir, t),
                None => {
                    let neg: Vec<Rational> = dir.iter().map(|d| -d).collect();
                    let t = self.max_step(&x, &neg).expect("box rows bound every direction");
                    (neg, t)
                }
            };
            x = x.iter().zip(&dir).map(|(a, d)| a + &t * d).collect();
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremeEnumeration {
    pub points: Vec<Vec<Rational>>,
    pub subsets_examined: usize,
    pub cap_hit: bool,
}

impl ExtremeEnumeration {
    pub fn infeasible(&self) -> bool {
        self.points.is_empty() && !self.cap_hit
    }
}

/// Exact vertex enumeration over row subsets of size `n` that contain every equality row.
pub fn enumerate_extremes(poly: &ExponentPolytope, cap: usize) -> ExtremeEnumeration {
    let n = poly.n;
    let eq: Vec<usize> = (0..poly.constraints.len())
        .filter(|&k| poly.constraints[k].relation == Relation::Equal)
        .collect();
    let ge: Vec<usize> = (0..poly.constraints.len())
        .filter(|&k| poly.constraints[k].relation == Relation::AtLeast)
        .collect();
    let mut points: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let mut examined = 0;
    let mut cap_hit = false;

    // Keep a maximal independent set of equality rows; the rest are redundant or contradictory.
    let mut eq_basis: Vec<usize> = Vec::new();
    for &k in &eq {
        let mut trial = eq_basis.clone();
        trial.push(k);
        if poly.matrix_of(&trial).rank() == trial.len() {
            eq_basis = trial;
        }
    }
    let need = n.saturating_sub(eq_basis.len());
    let mut combo: Vec<usize> = (0..need).collect();
    if need <= ge.len() {
        loop {
            if examined >= cap {
                cap_hit = true;
                break;
            }
            examined += 1;
            let mut rows = eq_basis.clone();
            rows.extend(combo.iter().map(|&c| ge[c]));
            let a = poly.matrix_of(&rows);
            let b: Vec<Rational> = rows.iter().map(|&k| poly.constraints[k].rhs.clone()).collect();
            if let Some(x) = a.solve(&b) {
                if poly.contains(&x) {
                    points.insert(x);
                }
            }
            if !next_combination(&mut combo, ge.len()) {
                break;
            }
        }
    }
    ExtremeEnumeration {
        points: points.into_iter().collect(),
        subsets_examined: examined,
        cap_hit,
    }
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremeDecomposition {
    pub terms: Vec<(Rational, Vec<Rational>)>,
}

impl ExtremeDecomposition {
    pub fn combine(&self) -> Vec<Rational> {
        let n = self.terms.first().map_or(0, |t| t.1.len());
        let mut out = vec![Rational::zero(); n];
        for (c, p) in &self.terms {
            for (o, x) in out.iter_mut().zip(p) {
                *o += c * x;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("exponents violate {row}")]
pub struct NotMember {
    pub row: String,
}

/// Writes `tau` as a convex combination of at most `n + 1` vertices.
///
/// Repeatedly: find a vertex `v` of the smallest face through the current
/// point `x`, push `x` away from `v` to the face boundary at `q`, and record
/// `x = λ v + (1 − λ) q`. The face dimension drops at every step.
pub fn caratheodory(poly: &ExponentPolytope, tau: &[Rational]) -> Result<ExtremeDecomposition, NotMember> {
    if tau.len() != poly.n {
        return Err(NotMember {
            row: format!("expected {} exponents, found {}", poly.n, tau.len()),
        });
    }
    if let Some(row) = poly.first_violated(tau) {
        return Err(NotMember { row: row.to_string() });
    }
    let mut terms: Vec<(Rational, Vec<Rational>)> = Vec::new();
    let mut x = tau.to_vec();
    let mut remaining = Rational::one();
    loop {
        if poly.tight_rank(&x) == poly.n {
            terms.push((remaining, x));
            break;
        }
        let v = poly.vertex_of_face(&x);
        let dir: Vec<Rational> = x.iter().zip(&v).map(|(a, b)| a - b).collect();
        let t = poly.max_step(&x, &dir).expect("box rows bound every direction");
        let q: Vec<Rational> = x.iter().zip(&dir).map(|(a, d)| a + &t * d).collect();
        // x = (t v + q) / (1 + t)
        let lambda = &t / (Rational::one() + &t);
        terms.push((&remaining * &lambda, v));
        remaining = &remaining * (Rational::one() - &lambda);
        x = q;
    }
    merge_terms(&mut terms);
    let decomposition = ExtremeDecomposition { terms };
    debug_assert_eq!(decomposition.combine(), tau);
    Ok(decomposition)
}

fn merge_terms(terms: &mut Vec<(Rational, Vec<Rational>)>) {
    let mut merged: Vec<(Rational, Vec<Rational>)> = Vec::new();
    for (c, p) in terms.drain(..) {
        if c.is_zero() {
            continue;
        }
        if let Some(m) = merged.iter_mut().find(|m| m.1 == p) {
            m.0 += c;
        } else {
            merged.push((c, p));
        }
    }
    merged.sort_by(|a, b| a.1.cmp(&b.1));
    *terms = merged;
}
