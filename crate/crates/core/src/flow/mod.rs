//! Graph decompositions of a vector space and balanced edge weights.
//!
//! A graph decomposition has subspaces as vertices and edges that raise the
//! dimension by exactly one along an inclusion. Weights are vector-valued
//! and nonnegative; "balanced" means inflow equals outflow at every vertex
//! other than `{0}` and the full space.

mod decompose;
mod project;

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::linalg::Subspace;
use crate::rational::{format_rational, Rational};

pub use decompose::{decompose_flow, ChainDecomposition, ChainTerm};
pub use project::{project_graph, project_weight, ProjectedGraph};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("weight has {found} edges, graph has {expected}")]
    EdgeCount { expected: usize, found: usize },
    #[error("weight rows have inconsistent width (edge {edge}: {found}, expected {expected})")]
    Width {
        edge: usize,
        expected: usize,
        found: usize,
    },
    #[error("weight is negative at edge {edge}, component {component}")]
    Negative { edge: usize, component: usize },
    #[error("weight is not balanced at vertex {vertex}, component {component}")]
    Unbalanced { vertex: usize, component: usize },
    #[error("graph is not a valid decomposition: {0}")]
    InvalidGraph(String),
    #[error("map has {found} columns, graph ambient is {expected}")]
    MapWidth { expected: usize, found: usize },
    #[error("projected weight broke an invariant: {0}")]
    ProjectionInvariant(String),
}

/// Directed graph on subspaces of ℝᵐ. Edges are `(from, to)` vertex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDecomposition {
    pub ambient: usize,
    pub vertices: Vec<Subspace>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphViolation {
    MissingZero,
    MissingFull,
    WrongAmbient { vertex: usize },
    DuplicateVertex { first: usize, second: usize },
    EdgeOutOfRange { edge: usize },
    DuplicateEdge { first: usize, second: usize },
    NotNested { edge: usize },
    DimensionJump { edge: usize, from_dim: usize, to_dim: usize },
    LacksIncoming { vertex: usize },
    LacksOutgoing { vertex: usize },
}

impl fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphViolation::MissingZero => write!(f, "zero subspace is not a vertex"),
            GraphViolation::MissingFull => write!(f, "full space is not a vertex"),
            GraphViolation::WrongAmbient { vertex } => {
                write!(f, "vertex {vertex} lives in the wrong ambient space")
            }
            GraphViolation::DuplicateVertex { first, second } => {
                write!(f, "vertices {first} and {second} are the same subspace")
            }
            GraphViolation::EdgeOutOfRange { edge } => {
                write!(f, "edge {edge} references a missing vertex")
            }
            GraphViolation::DuplicateEdge { first, second } => {
                write!(f, "edges {first} and {second} join the same pair")
            }
            GraphViolation::NotNested { edge } => {
                write!(f, "edge {edge}: source is not contained in target")
            }
            GraphViolation::DimensionJump {
                edge,
                from_dim,
                to_dim,
            } => write!(
                f,
                "edge {edge}: dimension goes {from_dim} -> {to_dim}, must rise by exactly 1"
            ),
            GraphViolation::LacksIncoming { vertex } => {
                write!(f, "vertex {vertex} lacks an incoming edge")
            }
            GraphViolation::LacksOutgoing { vertex } => {
                write!(f, "vertex {vertex} lacks an outgoing edge")
            }
        }
    }
}

impl GraphDecomposition {
    pub fn new(ambient: usize, vertices: Vec<Subspace>, edges: Vec<(usize, usize)>) -> Self {
        GraphDecomposition {
            ambient,
            vertices,
            edges,
        }
    }

    pub fn zero_index(&self) -> Option<usize> {
        self.vertices.iter().position(|v| v.is_zero() && v.ambient() == self.ambient)
    }

    pub fn full_index(&self) -> Option<usize> {
        self.vertices.iter().position(|v| v.is_full() && v.ambient() == self.ambient)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn outgoing(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(move |(_, e)| e.0 == v).map(|(k, _)| k)
    }

    pub fn incoming(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(move |(_, e)| e.1 == v).map(|(k, _)| k)
    }

    /// Every broken axiom, in a stable order. Empty means the graph is a valid decomposition.
    pub fn validate(&self) -> Vec<GraphViolation> {
        let mut out = Vec::new();
        if self.zero_index().is_none() {
            out.push(GraphViolation::MissingZero);
        }
        if self.full_index().is_none() {
            out.push(GraphViolation::MissingFull);
        }
        let mut seen: HashMap<&Subspace, usize> = HashMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.ambient() != self.ambient {
                out.push(GraphViolation::WrongAmbient { vertex: i });
            }
            if let Some(&first) = seen.get(v) {
                out.push(GraphViolation::DuplicateVertex { first, second: i });
            } else {
                seen.insert(v, i);
            }
        }
        let n = self.vertices.len();
        let mut pairs: HashMap<(usize, usize), usize> = HashMap::new();
        let mut has_in = vec![false; n];
        let mut has_out = vec![false; n];
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if a >= n || b >= n {
                out.push(GraphViolation::EdgeOutOfRange { edge: k });
                continue;
            }
            if let Some(&first) = pairs.get(&(a, b)) {
                out.push(GraphViolation::DuplicateEdge { first, second: k });
            } else {
                pairs.insert((a, b), k);
            }
            has_out[a] = true;
            has_in[b] = true;
            let (va, vb) = (&self.vertices[a], &self.vertices[b]);
            if va.ambient() != vb.ambient() || !va.is_subspace_of(vb) {
                out.push(GraphViolation::NotNested { edge: k });
            }
            if vb.dim() != va.dim() + 1 {
                out.push(GraphViolation::DimensionJump {
                    edge: k,
                    from_dim: va.dim(),
                    to_dim: vb.dim(),
                });
            }
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if !v.is_zero() && !has_in[i] {
                out.push(GraphViolation::LacksIncoming { vertex: i });
            }
            if !v.is_full() && !has_out[i] {
                out.push(GraphViolation::LacksOutgoing { vertex: i });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Sorts vertices by subspace order and edges by endpoint indices.
    ///
    /// Returns the edge permutation: `perm[new] = old`.
    pub fn canonicalize(&mut self) -> Vec<usize> {
        let mut vorder: Vec<usize> = (0..self.vertices.len()).collect();
        vorder.sort_by(|&a, &b| self.vertices[a].cmp(&self.vertices[b]));
        let mut new_index = vec![0; self.vertices.len()];
        for (new, &old) in vorder.iter().enumerate() {
            new_index[old] = new;
        }
        self.vertices = vorder.iter().map(|&o| self.vertices[o].clone()).collect();
        let remapped: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| (new_index[a], new_index[b]))
            .collect();
        let mut eorder: Vec<usize> = (0..remapped.len()).collect();
        eorder.sort_by_key(|&k| remapped[k]);
        self.edges = eorder.iter().map(|&k| remapped[k]).collect();
        eorder
    }

    /// Lowest-index path from `{0}` to the full space, as edge indices.
    pub fn first_maximal_chain(&self) -> Option<Vec<usize>> {
        let full = self.full_index()?;
        let mut at = self.zero_index()?;
        let mut chain = Vec::new();
        while at != full {
            let next = self.outgoing(at).next()?;
            chain.push(next);
            at = self.edges[next].1;
            if chain.len() > self.edges.len() {
                return None;
            }
        }
        Some(chain)
    }

    pub fn vertex_index(&self, v: &Subspace) -> Option<usize> {
        self.vertices.iter().position(|w| w == v)
    }
}

/// Vector-valued nonnegative edge weights; `values[edge][component]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightFunction {
    width: usize,
    values: Vec<Vec<Rational>>,
}

impl WeightFunction {
    pub fn new(width: usize, values: Vec<Vec<Rational>>) -> Result<Self, FlowError> {
        for (edge, row) in values.iter().enumerate() {
            if row.len() != width {
                return Err(FlowError::Width {
                    edge,
                    expected: width,
                    found: row.len(),
                });
            }
        }
        Ok(WeightFunction { width, values })
    }

    pub fn scalar(values: Vec<Rational>) -> Self {
        WeightFunction {
            width: 1,
            values: values.into_iter().map(|v| vec![v]).collect(),
        }
    }

    pub fn zeros(width: usize, edges: usize) -> Self {
        WeightFunction {
            width,
            values: vec![vec![Rational::zero(); width]; edges],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn get(&self, edge: usize, component: usize) -> &Rational {
        &self.values[edge][component]
    }

    pub fn set(&mut self, edge: usize, component: usize, value: Rational) {
        self.values[edge][component] = value;
    }

    /// One component as a scalar weight.
    pub fn component(&self, j: usize) -> WeightFunction {
        WeightFunction::scalar(self.values.iter().map(|r| r[j].clone()).collect())
    }

    pub fn permute_edges(&mut self, perm: &[usize]) {
        self.values = perm.iter().map(|&old| self.values[old].clone()).collect();
    }

    pub fn first_negative(&self) -> Option<(usize, usize)> {
        self.values.iter().enumerate().find_map(|(e, row)| {
            row.iter().position(Signed::is_negative).map(|c| (e, c))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(Zero::is_zero)
    }

    fn check(&self, g: &GraphDecomposition) -> Result<(), FlowError> {
        if self.values.len() != g.edges.len() {
            return Err(FlowError::EdgeCount {
                expected: g.edges.len(),
                found: self.values.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, row) in self.values.iter().enumerate() {
            let r: Vec<String> = row.iter().map(format_rational).collect();
            writeln!(f, "edge {k}: ({})", r.join(","))?;
        }
        Ok(())
    }
}

/// A vertex/component where inflow differs from outflow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Imbalance {
    pub vertex: usize,
    pub component: usize,
    pub inflow: Rational,
    pub outflow: Rational,
}

/// All imbalances of `phi`, skipping `{0}` and the full space.
pub fn imbalances(g: &GraphDecomposition, phi: &WeightFunction) -> Result<Vec<Imbalance>, FlowError> {
    phi.check(g)?;
    let n = g.vertices.len();
    let mut inflow = vec![vec![Rational::zero(); phi.width]; n];
    let mut outflow = inflow.clone();
    for (k, &(a, b)) in g.edges.iter().enumerate() {
        if a >= n || b >= n {
            continue;
        }
        for j in 0..phi.width {
            outflow[a][j] += &phi.values[k][j];
            inflow[b][j] += &phi.values[k][j];
        }
    }
    let mut out = Vec::new();
    for (v, sub) in g.vertices.iter().enumerate() {
        if sub.is_zero() || sub.is_full() {
            continue;
        }
        for j in 0..phi.width {
            if inflow[v][j] != outflow[v][j] {
                out.push(Imbalance {
                    vertex: v,
                    component: j,
                    inflow: inflow[v][j].clone(),
                    outflow: outflow[v][j].clone(),
                });
            }
        }
    }
    Ok(out)
}

pub fn is_balanced(g: &GraphDecomposition, phi: &WeightFunction) -> Result<bool, FlowError> {
    Ok(imbalances(g, phi)?.is_empty())
}

/// Componentwise sum over edges leaving `{0}`.
pub fn total_mass(g: &GraphDecomposition, phi: &WeightFunction) -> Result<Vec<Rational>, FlowError> {
    phi.check(g)?;
    let mut mass = vec![Rational::zero(); phi.width];
    if let Some(z) = g.zero_index() {
        for k in g.outgoing(z) {
            for (m, x) in mass.iter_mut().zip(&phi.values[k]) {
                *m += x;
            }
        }
    }
    Ok(mass)
}

/// Weight that is `coefficient` on each listed edge and zero elsewhere.
pub fn chain_indicator(g: &GraphDecomposition, chain: &[usize], coefficient: Rational) -> WeightFunction {
    let mut w = WeightFunction::zeros(1, g.edges.len());
    let on: HashSet<usize> = chain.iter().copied().collect();
    for k in on {
        w.values[k][0] = coefficient.clone();
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, ratio};

    #[test]
    fn loomis_whitney_chain_is_valid() {
        assert!(fixtures::coordinate_chain(3).validate().is_empty());
    }

    #[test]
    fn missing_edge_breaks_constraints() {
        let mut g = fixtures::coordinate_chain(3);
        g.edges.pop();
        let v = g.validate();
        assert_eq!(
            v,
            vec![
                GraphViolation::LacksOutgoing { vertex: 2 },
                GraphViolation::LacksIncoming { vertex: 3 },
            ]
        );
        let text: Vec<String> = v.iter().map(ToString::to_string).collect();
        assert!(text.iter().any(|t| t.contains("vertex 2 lacks an outgoing")));
    }

    #[test]
    fn dimension_jump_is_reported() {
        let g = GraphDecomposition::new(
            3,
            vec![Subspace::zero(3), Subspace::coordinate(3, &[0, 1]), Subspace::full(3)],
            vec![(0, 1), (1, 2)],
        );
        assert!(g
            .validate()
            .contains(&GraphViolation::DimensionJump { edge: 0, from_dim: 0, to_dim: 2 }));
    }

    #[test]
    fn not_nested_and_duplicates() {
        let g = GraphDecomposition::new(
            2,
            vec![
                Subspace::zero(2),
                Subspace::coordinate(2, &[0]),
                Subspace::coordinate(2, &[0]),
                Subspace::full(2),
            ],
            vec![(0, 1), (1, 3), (0, 2), (2, 3), (2, 3)],
        );
        let v = g.validate();
        assert!(v.contains(&GraphViolation::DuplicateVertex { first: 1, second: 2 }));
        assert!(v.contains(&GraphViolation::DuplicateEdge { first: 3, second: 4 }));
        let g = GraphDecomposition::new(
            2,
            vec![Subspace::zero(2), Subspace::coordinate(2, &[0]), Subspace::coordinate(2, &[1]), Subspace::full(2)],
            vec![(0, 1), (1, 2), (2, 3)],
        );
        assert!(g.validate().contains(&GraphViolation::NotNested { edge: 1 }));
    }

    #[test]
    fn r6_weights_balanced_with_half_mass() {
        let p = fixtures::r6_presentation();
        assert!(is_balanced(&p.graph, &p.theta).unwrap());
        assert_eq!(total_mass(&p.graph, &p.theta).unwrap(), vec![ratio(1, 2); 4]);
    }

    #[test]
    fn zero_weight_balanced() {
        let g = fixtures::coordinate_chain(4);
        let w = WeightFunction::zeros(3, 4);
        assert!(is_balanced(&g, &w).unwrap());
        assert_eq!(total_mass(&g, &w).unwrap(), vec![int(0); 3]);
    }

    #[test]
    fn diamond_change_unbalances_v5() {
        let p = fixtures::r6_presentation();
        let mut theta = p.theta.clone();
        // θ₁ on V₄→V₅ from 1/2 to 1/4
        theta.set(4, 0, ratio(1, 4));
        let bad = imbalances(&p.graph, &theta).unwrap();
        assert!(bad.iter().any(|b| b.vertex == 5 && b.component == 0));
        assert!(!is_balanced(&p.graph, &theta).unwrap());
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let g = fixtures::coordinate_chain(2);
        assert!(matches!(
            is_balanced(&g, &WeightFunction::zeros(1, 5)),
            Err(FlowError::EdgeCount { .. })
        ));
    }

    #[test]
    fn chain_indicator_balanced_mass_one() {
        let p = fixtures::r6_presentation();
        let chain = p.graph.first_maximal_chain().unwrap();
        let w = chain_indicator(&p.graph, &chain, int(1));
        assert!(is_balanced(&p.graph, &w).unwrap());
        assert_eq!(total_mass(&p.graph, &w).unwrap(), vec![int(1)]);
    }
}
