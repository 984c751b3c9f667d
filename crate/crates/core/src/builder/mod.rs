//! Constructs valid presentations by induction on dimension.
//!
//! At a non-extreme exponent tuple the builder splits it into extreme points
//! of the candidate polytope and merges the results by convex combination.
//! At an extreme point it splits the space along a critical subspace `V`,
//! builds presentations for the data restricted to `V` and projected to
//! `V⊥`, and concatenates them. Every output is re-verified, so a poor
//! candidate family can make the builder fail but never makes it lie.

mod polytope;

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::datum::{CandidateLattice, DatumError, HblDatum, NamedMap, SlackReport};
use crate::flow::{chain_indicator, total_mass, GraphDecomposition, WeightFunction};
use crate::linalg::Subspace;
use crate::presentation::{verify_presentation, Presentation};
use crate::rational::{format_rational, Rational};

pub use polytope::{
    caratheodory, enumerate_extremes, polytope_from_candidates, Constraint, ExponentPolytope, ExtremeDecomposition,
    ExtremeEnumeration, NotMember, Relation, RowSource,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("scaling condition fails: dim = {lhs}, weighted rank sum = {rhs}")]
    Scaling { lhs: String, rhs: String },
    #[error("subspace {subspace} violates the dimension condition (slack {slack})")]
    Violation { subspace: String, slack: String },
    #[error("candidate set insufficient: no critical subspace found for exponents {exponents} on R^{dim}")]
    CandidatesInsufficient { dim: usize, exponents: String },
    /// A violation inside the recursion: the datum itself passed, so the
    /// candidates admitted an exponent point or split they should not have.
    #[error("candidate set insufficient: sub-problem on R^{dim} with exponents {exponents} is violated at {subspace} (slack {slack})")]
    SubproblemViolation {
        dim: usize,
        exponents: String,
        subspace: String,
        slack: String,
    },
    #[error("{step} produced an invalid presentation: {reason}")]
    Verification { step: &'static str, reason: String },
    #[error("convex combination masses do not match the target exponents")]
    MassMismatch,
    #[error("vertex count {count} exceeds the bound {bound}")]
    VertexBound { count: usize, bound: u128 },
    #[error("exponent tuple is outside the candidate polytope: {0}")]
    NotMember(String),
    #[error(transparent)]
    Datum(#[from] DatumError),
}

impl BuildError {
    fn violation(r: &SlackReport) -> Self {
        BuildError::Violation {
            subspace: r.subspace.to_string(),
            slack: format_rational(&r.slack),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Size cap for the candidate lattices regenerated in sub-problems.
    pub max_lattice: usize,
    /// Record an indented recursion log.
    pub trace: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_lattice: 512,
            trace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub presentation: Presentation,
    pub trace: Vec<String>,
}

/// Single edge `{0} → H` with `θᵢ = τᵢ`.
pub fn base_case_dim1(datum: &HblDatum) -> Result<Presentation, BuildError> {
    let scaling = datum.check_scaling();
    if datum.dim() != 1 || !scaling.holds {
        return Err(BuildError::Scaling {
            lhs: format_rational(&scaling.lhs),
            rhs: format_rational(&scaling.rhs),
        });
    }
    let graph = GraphDecomposition::new(1, vec![Subspace::zero(1), Subspace::full(1)], vec![(0, 1)]);
    let theta = WeightFunction::new(datum.len(), vec![datum.exponents().to_vec()]).expect("width N");
    let p = Presentation::new(graph, theta).expect("one edge");
    ensure_valid(datum, &p, "base case")?;
    Ok(p)
}

/// Glues a presentation of the data on `V` under one of the data on `V⊥`.
///
/// `low` must present `datum.restrict(v)` and `high` must present `datum.quotient(v)`.
pub fn concatenate(datum: &HblDatum, v: &Subspace, low: &Presentation, high: &Presentation) -> Result<Presentation, BuildError> {
    let m = datum.dim();
    let low_embed = v.basis().transpose();
    let high_embed = v.orthogonal_complement().basis().transpose();
    let mut vertices: Vec<Subspace> = Vec::new();
    let mut index: HashMap<Subspace, usize> = HashMap::new();
    let mut intern = |s: Subspace, vertices: &mut Vec<Subspace>| -> usize {
        *index.entry(s.clone()).or_insert_with(|| {
            vertices.push(s);
            vertices.len() - 1
        })
    };
    let map_err = |e: crate::linalg::LinalgError| BuildError::Datum(e.into());

    let low_ids: Vec<usize> = low
        .graph
        .vertices
        .iter()
        .map(|w| Ok(intern(w.image(&low_embed).map_err(map_err)?, &mut vertices)))
        .collect::<Result<_, BuildError>>()?;
    let high_ids: Vec<usize> = high
        .graph
        .vertices
        .iter()
        .map(|w| {
            let lifted = w.image(&high_embed).map_err(map_err)?.sum(v).map_err(map_err)?;
            Ok(intern(lifted, &mut vertices))
        })
        .collect::<Result<_, BuildError>>()?;

    let mut edges = Vec::new();
    let mut rows = Vec::new();
    for (k, &(a, b)) in low.graph.edges.iter().enumerate() {
        edges.push((low_ids[a], low_ids[b]));
        rows.push(low.theta.values()[k].clone());
    }
    for (k, &(a, b)) in high.graph.edges.iter().enumerate() {
        edges.push((high_ids[a], high_ids[b]));
        rows.push(high.theta.values()[k].clone());
    }
    let theta = WeightFunction::new(datum.len(), rows).map_err(|e| BuildError::Verification {
        step: "concatenation",
        reason: e.to_string(),
    })?;
    let p = Presentation::new(GraphDecomposition::new(m, vertices, edges), theta)
        .expect("edge count matches")
        .canonical();
    ensure_valid(datum, &p, "concatenation")?;
    Ok(p)
}

/// Union graph with `θ = Σ c·θ_k`; verified against `datum`, whose exponents
/// must equal `Σ c·τ_k`.
pub fn convex_combine(datum: &HblDatum, terms: &[(Rational, Presentation)]) -> Result<Presentation, BuildError> {
    let n = datum.len();
    let total: Rational = terms.iter().map(|t| t.0.clone()).fold(Rational::zero(), |a, b| a + b);
    if !total.is_one() || terms.iter().any(|t| t.0.is_negative()) {
        return Err(BuildError::MassMismatch);
    }
    let mut vertices: Vec<Subspace> = Vec::new();
    let mut vindex: HashMap<Subspace, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut eindex: HashMap<(usize, usize), usize> = HashMap::new();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut mass = vec![Rational::zero(); n];
    for (c, p) in terms {
        if p.theta.width() != n || p.graph.ambient != datum.dim() {
            return Err(BuildError::MassMismatch);
        }
        let tm = total_mass(&p.graph, &p.theta).map_err(|_| BuildError::MassMismatch)?;
        for (m, t) in mass.iter_mut().zip(&tm) {
            *m += c * t;
        }
        let ids: Vec<usize> = p
            .graph
            .vertices
            .iter()
            .map(|v| {
                *vindex.entry(v.clone()).or_insert_with(|| {
                    vertices.push(v.clone());
                    vertices.len() - 1
                })
            })
            .collect();
        for (k, &(a, b)) in p.graph.edges.iter().enumerate() {
            let key = (ids[a], ids[b]);
            let e = *eindex.entry(key).or_insert_with(|| {
                edges.push(key);
                rows.push(vec![Rational::zero(); n]);
                edges.len() - 1
            });
            for (r, x) in rows[e].iter_mut().zip(&p.theta.values()[k]) {
                *r += c * x;
            }
        }
    }
    if mass != datum.exponents() {
        return Err(BuildError::MassMismatch);
    }
    let theta = WeightFunction::new(n, rows).expect("rows have width n");
    let p = Presentation::new(GraphDecomposition::new(datum.dim(), vertices, edges), theta)
        .expect("edge count matches")
        .canonical();
    ensure_valid(datum, &p, "convex combination")?;
    Ok(p)
}

/// `N⁻¹[(N+1)^m − 1] + 1`, or `None` on overflow.
pub fn vertex_bound(n: usize, m: usize) -> Option<u128> {
    let base = (n as u128).checked_add(1)?;
    let pow = base.checked_pow(u32::try_from(m).ok()?)?;
    Some((pow - 1) / n as u128 + 1)
}

/// Builds a verified presentation from a candidate family.
pub fn build_presentation(datum: &HblDatum, candidates: &[Subspace], options: &BuildOptions) -> Result<BuildOutcome, BuildError> {
    let mut builder = Builder {
        options,
        trace: Vec::new(),
    };
    let p = builder.build(datum, candidates, 0)?;
    ensure_valid(datum, &p, "final assembly")?;
    if let Some(bound) = vertex_bound(datum.len(), datum.dim()) {
        if p.vertex_count() as u128 > bound {
            return Err(BuildError::VertexBound {
                count: p.vertex_count(),
                bound,
            });
        }
    }
    Ok(BuildOutcome {
        presentation: p,
        trace: builder.trace,
    })
}

struct Builder<'a> {
    options: &'a BuildOptions,
    trace: Vec<String>,
}

impl Builder<'_> {
    fn log(&mut self, depth: usize, msg: impl FnOnce() -> String) {
        if self.options.trace {
            self.trace.push(format!("{}{}", "  ".repeat(depth), msg()));
        }
    }

    fn build(&mut self, datum: &HblDatum, candidates: &[Subspace], depth: usize) -> Result<Presentation, BuildError> {
        let tau = datum.exponents().to_vec();
        self.log(depth, || format!("R^{} with tau = ({})", datum.dim(), join(&tau)));

        let scaling = datum.check_scaling();
        if !scaling.holds {
            return Err(BuildError::Scaling {
                lhs: format_rational(&scaling.lhs),
                rhs: format_rational(&scaling.rhs),
            });
        }
        let lattice = CandidateLattice::from_subspaces(datum.dim(), candidates.iter().cloned());
        if let Some(v) = datum.find_violation(&lattice)? {
            if depth == 0 {
                return Err(BuildError::violation(&v));
            }
            return Err(BuildError::SubproblemViolation {
                dim: datum.dim(),
                exponents: join(&tau),
                subspace: v.subspace.to_string(),
                slack: format_rational(&v.slack),
            });
        }

        let active: Vec<usize> = (0..datum.len()).filter(|&i| datum.rank(i) > 0).collect();
        if active.len() < datum.len() {
            return self.build_without_null_maps(datum, &active, &lattice.subspaces, depth);
        }
        if datum.dim() == 1 {
            self.log(depth, || "base case".to_string());
            return base_case_dim1(datum);
        }

        let poly = polytope_from_candidates(datum, &lattice.subspaces)?;
        if !poly.is_extreme(&tau) {
            let dec = caratheodory(&poly, &tau).map_err(|e| BuildError::NotMember(e.row))?;
            self.log(depth, || format!("not extreme; {} extreme points", dec.terms.len()));
            let mut parts = Vec::new();
            for (c, point) in &dec.terms {
                self.log(depth, || format!("weight {} at ({})", format_rational(c), join(point)));
                let sub = datum.with_exponents(point.clone())?;
                parts.push((c.clone(), self.build(&sub, &lattice.subspaces, depth + 1)?));
            }
            return convex_combine(datum, &parts);
        }

        let v = self.choose_split(datum, &lattice)?;
        self.log(depth, || format!("split along {v}"));
        let (low, _) = datum.restrict(&v)?;
        let (high, _) = datum.quotient(&v)?;

        let low_seeds: Vec<Subspace> = lattice
            .subspaces
            .iter()
            .map(|u| chart_coordinates(&v, &u.intersect(&v).expect("same ambient")))
            .collect();
        let complement = v.orthogonal_complement();
        let high_seeds: Vec<Subspace> = lattice
            .subspaces
            .iter()
            .map(|u| {
                let lifted = u.sum(&v).expect("same ambient");
                chart_coordinates(&complement, &lifted.intersect(&complement).expect("same ambient"))
            })
            .collect();
        let low_lattice = low.generate_lattice(&dedup(low_seeds), self.options.max_lattice)?;
        let high_lattice = high.generate_lattice(&dedup(high_seeds), self.options.max_lattice)?;

        let p_low = self.build(&low, &low_lattice.subspaces, depth + 1)?;
        let p_high = self.build(&high, &high_lattice.subspaces, depth + 1)?;
        concatenate(datum, &v, &p_low, &p_high)
    }

    /// Lowest critical candidate; otherwise the preimage of a hyperplane of `πᵢ(H)` for some `τᵢ = 1`.
    fn choose_split(&mut self, datum: &HblDatum, lattice: &CandidateLattice) -> Result<Subspace, BuildError> {
        if let Some(r) = datum.find_critical(lattice)?.into_iter().next() {
            return Ok(r.subspace);
        }
        for i in 0..datum.len() {
            if datum.exponents()[i].is_one() && datum.rank(i) > 0 {
                let range = datum.full().image(datum.map(i)).map_err(DatumError::from)?;
                let rows = range.basis().row_vecs();
                let hyperplane = Subspace::from_vectors(range.ambient(), rows[..rows.len() - 1].to_vec())
                    .map_err(DatumError::from)?;
                return Ok(hyperplane.preimage(datum.map(i)).map_err(DatumError::from)?);
            }
        }
        Err(BuildError::CandidatesInsufficient {
            dim: datum.dim(),
            exponents: join(datum.exponents()),
        })
    }

    /// Builds on the maps of positive rank, then gives each rank-0 map
    /// `τᵢ` times the indicator of the first maximal chain.
    fn build_without_null_maps(
        &mut self,
        datum: &HblDatum,
        active: &[usize],
        candidates: &[Subspace],
        depth: usize,
    ) -> Result<Presentation, BuildError> {
        self.log(depth, || format!("dropping {} rank-0 maps", datum.len() - active.len()));
        let maps: Vec<NamedMap> = active.iter().map(|&i| datum.maps()[i].clone()).collect();
        let exps: Vec<Rational> = active.iter().map(|&i| datum.exponents()[i].clone()).collect();
        let reduced = HblDatum::new(datum.dim(), maps, exps)?;
        let inner = self.build(&reduced, candidates, depth + 1)?;
        let chain = inner.graph.first_maximal_chain().ok_or(BuildError::Verification {
            step: "null-map assembly",
            reason: "no maximal chain".into(),
        })?;
        let indicator = chain_indicator(&inner.graph, &chain, Rational::one());
        let mut rows = vec![vec![Rational::zero(); datum.len()]; inner.graph.edges.len()];
        for (k, row) in rows.iter_mut().enumerate() {
            for (pos, &i) in active.iter().enumerate() {
                row[i] = inner.theta.get(k, pos).clone();
            }
            for i in (0..datum.len()).filter(|i| !active.contains(i)) {
                row[i] = indicator.get(k, 0) * &datum.exponents()[i];
            }
        }
        let p = Presentation::new(inner.graph, WeightFunction::new(datum.len(), rows).expect("width N"))
            .expect("edge count");
        ensure_valid(datum, &p, "null-map assembly")?;
        Ok(p)
    }
}

fn ensure_valid(datum: &HblDatum, p: &Presentation, step: &'static str) -> Result<(), BuildError> {
    let report = verify_presentation(datum, p);
    if report.valid() {
        return Ok(());
    }
    let reason: Vec<String> = report.failures.iter().map(ToString::to_string).collect();
    Err(BuildError::Verification {
        step,
        reason: reason.join("; "),
    })
}

/// Expresses a subspace of `chart_space` in the RREF coordinates of `chart_space`.
fn chart_coordinates(chart_space: &Subspace, s: &Subspace) -> Subspace {
    let rows = (0..s.dim())
        .map(|i| chart_space.coordinates(s.basis().row(i)).expect("subspace of chart space"))
        .collect();
    Subspace::from_vectors(chart_space.dim(), rows).expect("chart width")
}

fn dedup(mut v: Vec<Subspace>) -> Vec<Subspace> {
    v.sort();
    v.dedup();
    v
}

fn join(v: &[Rational]) -> String {
    v.iter().map(format_rational).collect::<Vec<_>>().join(",")
}


#[cfg(test)]
mod r6_tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn builds_r6_from_line_seeds() {
        let d = fixtures::r6_datum();
        let lat = d.generate_lattice(&fixtures::r6_line_candidates(), 512).unwrap();
        let out = build_presentation(&d, &lat.subspaces, &BuildOptions::default()).unwrap();
        assert!(verify_presentation(&d, &out.presentation).valid());
        assert!(out.presentation.vertex_count() <= 3907);
    }
}
