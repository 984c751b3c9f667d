//! Valid presentations: verification, edge norms and the finiteness constant.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::datum::HblDatum;
use crate::flow::{imbalances, total_mass, FlowError, GraphDecomposition, GraphViolation, Imbalance, WeightFunction};
use crate::linalg::{Matrix, Subspace};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PresentationError {
    #[error("datum acts on R^{datum}, presentation graph on R^{graph}")]
    Ambient { datum: usize, graph: usize },
    #[error("datum has {maps} maps, weights have width {width}")]
    Width { maps: usize, width: usize },
    #[error("map {map} does not distinguish the endpoints of edge {edge}")]
    Undistinguished { map: usize, edge: usize },
    #[error("edge {edge} does not add a single direction")]
    DegenerateEdge { edge: usize },
    #[error("index out of range: {0}")]
    Index(String),
    #[error("presentation is not valid: {0}")]
    Invalid(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// A graph decomposition with one balanced weight per map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub graph: GraphDecomposition,
    pub theta: WeightFunction,
}

impl Presentation {
    pub fn new(graph: GraphDecomposition, theta: WeightFunction) -> Result<Self, PresentationError> {
        if theta.len() != graph.edges.len() {
            return Err(FlowError::EdgeCount {
                expected: graph.edges.len(),
                found: theta.len(),
            }
            .into());
        }
        Ok(Presentation { graph, theta })
    }

    /// Sorts vertices and edges (weights follow their edges).
    pub fn canonicalize(&mut self) {
        let perm = self.graph.canonicalize();
        self.theta.permute_edges(&perm);
    }

    pub fn canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertices.len()
    }
}

fn check_shapes(datum: &HblDatum, p: &Presentation) -> Result<(), PresentationError> {
    if datum.dim() != p.graph.ambient {
        return Err(PresentationError::Ambient {
            datum: datum.dim(),
            graph: p.graph.ambient,
        });
    }
    if datum.len() != p.theta.width() {
        return Err(PresentationError::Width {
            maps: datum.len(),
            width: p.theta.width(),
        });
    }
    if p.theta.len() != p.graph.edges.len() {
        return Err(FlowError::EdgeCount {
            expected: p.graph.edges.len(),
            found: p.theta.len(),
        }
        .into());
    }
    Ok(())
}

/// `table[edge][i]` is true when `πᵢ` maps the endpoints of `edge` to unequal subspaces.
pub fn distinguishing_table(datum: &HblDatum, graph: &GraphDecomposition) -> Result<Vec<Vec<bool>>, PresentationError> {
    let n = graph.vertices.len();
    let images: Vec<Vec<Subspace>> = graph
        .vertices
        .iter()
        .map(|v| {
            (0..datum.len())
                .map(|i| v.image(datum.map(i)))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()
        .map_err(|e| PresentationError::Index(e.to_string()))?;
    graph
        .edges
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            if a >= n || b >= n {
                return Err(PresentationError::Index(format!("edge {k}")));
            }
            Ok((0..datum.len()).map(|i| images[a][i] != images[b][i]).collect())
        })
        .collect()
}

/// `σ(e) = Σ θᵢ(e)` over the maps that distinguish the endpoints of `e`.
pub fn summary_weight(datum: &HblDatum, p: &Presentation) -> Result<WeightFunction, PresentationError> {
    check_shapes(datum, p)?;
    let table = distinguishing_table(datum, &p.graph)?;
    Ok(summary_from_table(&table, &p.theta))
}

fn summary_from_table(table: &[Vec<bool>], theta: &WeightFunction) -> WeightFunction {
    WeightFunction::scalar(
        table
            .iter()
            .enumerate()
            .map(|(k, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &d)| d)
                    .fold(Rational::zero(), |acc, (i, _)| acc + theta.get(k, i))
            })
            .collect(),
    )
}

/// Balance and mass of one θᵢ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapCheck {
    pub name: String,
    pub negative_edges: Vec<usize>,
    pub imbalances: Vec<Imbalance>,
    pub mass: Rational,
    pub expected_mass: Rational,
}

impl MapCheck {
    pub fn ok(&self) -> bool {
        self.negative_edges.is_empty() && self.imbalances.is_empty() && self.mass == self.expected_mass
    }
}

/// One broken hypothesis of a presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Shape(String),
    Graph(GraphViolation),
    ThetaNegative { map: usize, edge: usize },
    ThetaBalance { map: usize, vertex: usize },
    ThetaMass { map: usize, mass: Rational, expected: Rational },
    SigmaBalance { vertex: usize },
    SigmaMass { mass: Rational },
}

impl Failure {
    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Shape(_) => "shape",
            Failure::Graph(_) => "graph",
            Failure::ThetaNegative { .. } => "theta-negative",
            Failure::ThetaBalance { .. } => "theta-balance",
            Failure::ThetaMass { .. } => "theta-mass",
            Failure::SigmaBalance { .. } => "sigma-balance",
            Failure::SigmaMass { .. } => "sigma-mass",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Shape(s) => write!(f, "{s}"),
            Failure::Graph(v) => write!(f, "graph: {v}"),
            Failure::ThetaNegative { map, edge } => {
                write!(f, "theta{} is negative on edge {edge}", map + 1)
            }
            Failure::ThetaBalance { map, vertex } => {
                write!(f, "theta{} is unbalanced at vertex {vertex}", map + 1)
            }
            Failure::ThetaMass {
                map,
                mass,
                expected,
            } => write!(
                f,
                "theta{} has mass {} but tau{} = {}",
                map + 1,
                format_rational(mass),
                map + 1,
                format_rational(expected)
            ),
            Failure::SigmaBalance { vertex } => {
                write!(f, "summary weight is unbalanced at vertex {vertex}")
            }
            Failure::SigmaMass { mass } => {
                write!(f, "summary weight has mass {} instead of 1", format_rational(mass))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub graph_violations: Vec<GraphViolation>,
    pub maps: Vec<MapCheck>,
    /// `σ` per edge; empty when the shapes did not allow computing it.
    pub summary: Vec<Rational>,
    pub distinguishing: Vec<Vec<bool>>,
    pub summary_imbalances: Vec<Imbalance>,
    pub summary_mass: Rational,
    pub failures: Vec<Failure>,
}

impl VerificationReport {
    pub fn valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks every hypothesis of a valid presentation; all failures land in the report.
pub fn verify_presentation(datum: &HblDatum, p: &Presentation) -> VerificationReport {
    let mut report = VerificationReport {
        graph_violations: Vec::new(),
        maps: Vec::new(),
        summary: Vec::new(),
        distinguishing: Vec::new(),
        summary_imbalances: Vec::new(),
        summary_mass: Rational::zero(),
        failures: Vec::new(),
    };
    if let Err(e) = check_shapes(datum, p) {
        report.failures.push(Failure::Shape(e.to_string()));
        return report;
    }
    report.graph_violations = p.graph.validate();
    report
        .failures
        .extend(report.graph_violations.iter().cloned().map(Failure::Graph));
    let structural = report
        .graph_violations
        .iter()
        .any(|v| matches!(v, GraphViolation::EdgeOutOfRange { .. } | GraphViolation::WrongAmbient { .. }));
    if structural {
        return report;
    }

    for i in 0..datum.len() {
        let phi = p.theta.component(i);
        let negative_edges: Vec<usize> = (0..phi.len()).filter(|&k| phi.get(k, 0).is_negative()).collect();
        let imb = imbalances(&p.graph, &phi).expect("shapes checked");
        let mass = total_mass(&p.graph, &phi).expect("shapes checked").remove(0);
        let check = MapCheck {
            name: datum.maps()[i].name.clone(),
            negative_edges,
            imbalances: imb,
            mass,
            expected_mass: datum.exponents()[i].clone(),
        };
        for &edge in &check.negative_edges {
            report.failures.push(Failure::ThetaNegative { map: i, edge });
        }
        for b in &check.imbalances {
            report.failures.push(Failure::ThetaBalance {
                map: i,
                vertex: b.vertex,
            });
        }
        if check.mass != check.expected_mass {
            report.failures.push(Failure::ThetaMass {
                map: i,
                mass: check.mass.clone(),
                expected: check.expected_mass.clone(),
            });
        }
        report.maps.push(check);
    }

    let table = match distinguishing_table(datum, &p.graph) {
        Ok(t) => t,
        Err(e) => {
            report.failures.push(Failure::Shape(e.to_string()));
            return report;
        }
    };
    let sigma = summary_from_table(&table, &p.theta);
    report.summary_imbalances = imbalances(&p.graph, &sigma).expect("shapes checked");
    report.summary_mass = total_mass(&p.graph, &sigma).expect("shapes checked").remove(0);
    for b in &report.summary_imbalances {
        report.failures.push(Failure::SigmaBalance { vertex: b.vertex });
    }
    if !report.summary_mass.is_one() {
        report.failures.push(Failure::SigmaMass {
            mass: report.summary_mass.clone(),
        });
    }
    report.summary = sigma.values().iter().map(|r| r[0].clone()).collect();
    report.distinguishing = table;
    report
}

/// `‖πᵢ·e‖²` for `e = V₁→V₂`, as `‖P⊥_{πᵢ(V₁)} πᵢ(w)‖² / ‖w‖²` with `w` spanning `V₂ ∩ V₁⊥`.
pub fn edge_norm_squared(datum: &HblDatum, p: &Presentation, map: usize, edge: usize) -> Result<Rational, PresentationError> {
    check_shapes(datum, p)?;
    if map >= datum.len() {
        return Err(PresentationError::Index(format!("map {map}")));
    }
    let &(a, b) = p
        .graph
        .edges
        .get(edge)
        .ok_or_else(|| PresentationError::Index(format!("edge {edge}")))?;
    edge_norm_squared_between(datum.map(map), &p.graph.vertices[a], &p.graph.vertices[b])
        .map_err(|e| match e {
            NormError::Undistinguished => PresentationError::Undistinguished { map, edge },
            NormError::Degenerate => PresentationError::DegenerateEdge { edge },
        })
}

enum NormError {
    Undistinguished,
    Degenerate,
}

fn edge_norm_squared_between(pi: &Matrix, v1: &Subspace, v2: &Subspace) -> Result<Rational, NormError> {
    let img1 = v1.image(pi).map_err(|_| NormError::Degenerate)?;
    let img2 = v2.image(pi).map_err(|_| NormError::Degenerate)?;
    if img1 == img2 {
        return Err(NormError::Undistinguished);
    }
    let new_dir = v2
        .intersect(&v1.orthogonal_complement())
        .map_err(|_| NormError::Degenerate)?;
    if new_dir.dim() != 1 {
        return Err(NormError::Degenerate);
    }
    let w = new_dir.basis().row(0).to_vec();
    let pw = pi.mul_vec(&w).map_err(|_| NormError::Degenerate)?;
    let projected = img1
        .complement_projection_matrix()
        .mul_vec(&pw)
        .map_err(|_| NormError::Degenerate)?;
    Ok(Subspace::norm_squared(&projected) / Subspace::norm_squared(&w))
}

/// One factor `base^exponent` of the constant, with `base = ‖πᵢ·e‖²` and `exponent = −θᵢ(e)/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundFactor {
    pub map: usize,
    pub edge: usize,
    pub base: Rational,
    pub exponent: Rational,
}

/// `C = ∏ᵢ ∏ₑ ‖πᵢ·e‖^{−θᵢ(e)}` over pairs where `πᵢ` distinguishes `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCertificate {
    pub factors: Vec<BoundFactor>,
    pub value: f64,
    pub exact_one: bool,
}

impl BoundCertificate {
    /// Exponents summed per distinct base; bases equal to 1 and zero totals are dropped.
    pub fn normalized(&self) -> BTreeMap<Rational, Rational> {
        let mut out: BTreeMap<Rational, Rational> = BTreeMap::new();
        for f in &self.factors {
            if f.base.is_one() {
                continue;
            }
            *out.entry(f.base.clone()).or_insert_with(Rational::zero) += &f.exponent;
        }
        out.retain(|_, e| !e.is_zero());
        out
    }

    pub fn log_value(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| crate::rational::to_f64(&f.exponent) * crate::rational::ln(&f.base))
            .sum()
    }
}

pub fn bound_constant(datum: &HblDatum, p: &Presentation) -> Result<BoundCertificate, PresentationError> {
    let report = verify_presentation(datum, p);
    if !report.valid() {
        let why: Vec<String> = report.failures.iter().map(ToString::to_string).collect();
        return Err(PresentationError::Invalid(why.join("; ")));
    }
    let half = Rational::new(1.into(), 2.into());
    let mut factors = Vec::new();
    for i in 0..datum.len() {
        for (k, row) in report.distinguishing.iter().enumerate() {
            let theta = p.theta.get(k, i);
            if !row[i] || theta.is_zero() {
                continue;
            }
            let base = edge_norm_squared(datum, p, i, k)?;
            factors.push(BoundFactor {
                map: i,
                edge: k,
                base,
                exponent: -(theta * &half),
            });
        }
    }
    let exact_one = factors.iter().all(|f| f.base.is_one() || f.exponent.is_zero());
    let mut cert = BoundCertificate {
        factors,
        value: 1.0,
        exact_one,
    };
    cert.value = if exact_one { 1.0 } else { cert.log_value().exp() };
    Ok(cert)
}

/// Pushes every vertex forward by an invertible `t`; edge order and weights are kept.
///
/// Pairs with [`HblDatum::transform`]: if `p` presents `datum`, then
/// `transport(p, t)` presents `datum.transform(t, ·)`.
pub fn transport(p: &Presentation, t: &Matrix) -> Result<Presentation, PresentationError> {
    let m = p.graph.ambient;
    if t.rows() != m || t.cols() != m || t.rank() != m {
        return Err(PresentationError::Index(format!("transport needs an invertible {m}x{m} matrix")));
    }
    let vertices = p
        .graph
        .vertices
        .iter()
        .map(|v| v.image(t).expect("square of matching size"))
        .collect();
    Presentation::new(GraphDecomposition::new(m, vertices, p.graph.edges.clone()), p.theta.clone())
}

/// DOT digraph of a presentation; θ entries of distinguishing maps carry a `*`.
pub fn export_dot(datum: &HblDatum, p: &Presentation) -> String {
    let table = distinguishing_table(datum, &p.graph).ok();
    let mut out = String::from("digraph presentation {\n  rankdir=LR;\n");
    for (i, v) in p.graph.vertices.iter().enumerate() {
        out.push_str(&format!("  v{i} [label=\"{}\"];\n", v));
    }
    for (k, &(a, b)) in p.graph.edges.iter().enumerate() {
        let entries: Vec<String> = (0..p.theta.width())
            .map(|i| {
                let mark = table
                    .as_ref()
                    .and_then(|t| t.get(k))
                    .and_then(|r| r.get(i))
                    .copied()
                    .unwrap_or(false);
                let theta = p
                    .theta
                    .values()
                    .get(k)
                    .and_then(|r| r.get(i))
                    .map(format_rational)
                    .unwrap_or_else(|| "?".into());
                if mark {
                    format!("{theta}*")
                } else {
                    theta
                }
            })
            .collect();
        out.push_str(&format!("  v{a} -> v{b} [label=\"({})\"];\n", entries.join(",")));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, ratio};

    #[test]
    fn r6_diamond_summary() {
        let d = fixtures::r6_datum();
        let p = fixtures::r6_presentation();
        let table = distinguishing_table(&d, &p.graph).unwrap();
        // V₅→ℝ⁶ (edge 6): only π₃ distinguishes
        assert_eq!(table[6], vec![false, false, true, false]);
        let sigma = summary_weight(&d, &p).unwrap();
        assert_eq!(sigma.get(6, 0), &ratio(1, 2));
        // underlines in the diagram, edge by edge
        let expected = [
            [true, false, false, true],
            [true, true, false, false],
            [false, true, false, true],
            [false, false, true, true],
            [true, true, false, true],
            [true, true, true, false],
            [false, false, true, false],
            [false, false, false, true],
        ];
        for (k, row) in expected.iter().enumerate() {
            assert_eq!(table[k], row.to_vec(), "edge {k}");
        }
    }

    #[test]
    fn loomis_whitney_summary_is_one() {
        for d in 2..=5 {
            let datum = fixtures::loomis_whitney_datum(d, vec![ratio(1, d as i64); d + 1]);
            let p = fixtures::loomis_whitney_presentation(d);
            let sigma = summary_weight(&datum, &p).unwrap();
            assert!(sigma.values().iter().all(|r| r[0] == int(1)));
        }
    }

    #[test]
    fn zero_maps_have_zero_summary() {
        let datum = HblDatum::from_matrices(2, vec![Matrix::zeros(1, 2)], vec![int(1)]).unwrap();
        let p = Presentation::new(
            fixtures::coordinate_chain(2),
            WeightFunction::new(1, vec![vec![int(1)], vec![int(1)]]).unwrap(),
        )
        .unwrap();
        assert!(summary_weight(&datum, &p).unwrap().is_zero());
    }

    #[test]
    fn fixtures_verify() {
        assert!(verify_presentation(&fixtures::r6_datum(), &fixtures::r6_presentation()).valid());
        for d in 2..=5 {
            let datum = fixtures::loomis_whitney_datum(d, vec![ratio(1, d as i64); d + 1]);
            let report = verify_presentation(&datum, &fixtures::loomis_whitney_presentation(d));
            assert!(report.valid(), "d={d}: {:?}", report.failures);
        }
    }

    #[test]
    fn broken_theta2_cites_imbalances() {
        let d = fixtures::r6_datum();
        let mut p = fixtures::r6_presentation();
        // θ₂(V₄→V₆)
        p.theta.set(5, 1, ratio(1, 4));
        let r = verify_presentation(&d, &p);
        assert!(!r.valid());
        assert!(r.failures.contains(&Failure::ThetaBalance { map: 1, vertex: 6 }));
        // edges out of {0} are untouched, so the summary mass stays 1; the damage shows as σ imbalance
        assert_eq!(r.summary_mass, int(1));
        assert!(r.failures.iter().any(|f| matches!(f, Failure::SigmaBalance { .. })), "{:?}", r.failures);
    }

    #[test]
    fn edge_norms() {
        for d in 2..=3 {
            let datum = fixtures::loomis_whitney_datum(d, vec![ratio(1, d as i64); d + 1]);
            let p = fixtures::loomis_whitney_presentation(d);
            for k in 0..=d {
                for i in 0..=d {
                    if i != k {
                        assert_eq!(edge_norm_squared(&datum, &p, i, k).unwrap(), int(1));
                    }
                }
                assert!(matches!(
                    edge_norm_squared(&datum, &p, k, k),
                    Err(PresentationError::Undistinguished { .. })
                ));
            }
        }
        let d = fixtures::r6_datum();
        let p = fixtures::r6_presentation();
        // V₄→V₆ is edge 5, V₆→ℝ⁶ is edge 7
        assert_eq!(edge_norm_squared(&d, &p, 1, 5).unwrap(), int(2));
        assert_eq!(edge_norm_squared(&d, &p, 3, 7).unwrap(), int(2));
    }

    #[test]
    fn loomis_whitney_constant_is_one() {
        let datum = fixtures::loomis_whitney_datum(2, vec![ratio(1, 2); 3]);
        let c = bound_constant(&datum, &fixtures::loomis_whitney_presentation(2)).unwrap();
        assert!(c.exact_one);
        assert_eq!(c.value, 1.0);
        assert!(c.factors.iter().all(|f| f.base == int(1)));
    }

    #[test]
    fn r6_constant_factors() {
        let d = fixtures::r6_datum();
        let p = fixtures::r6_presentation();
        let c = bound_constant(&d, &p).unwrap();
        let f = c.factors.iter().find(|f| f.map == 1 && f.edge == 5).unwrap();
        assert_eq!((f.base.clone(), f.exponent.clone()), (int(2), ratio(-1, 4)));
        assert!(c.factors.iter().all(|f| f.base.is_positive()));
        // zero-θ pairs are omitted
        assert!(c.factors.iter().all(|f| !f.exponent.is_zero()));
        assert!(c.value > 0.0 && c.value.is_finite());
    }

    #[test]
    fn invalid_presentation_has_no_constant() {
        let d = fixtures::r6_datum();
        let mut p = fixtures::r6_presentation();
        p.theta.set(0, 0, int(1));
        assert!(matches!(bound_constant(&d, &p), Err(PresentationError::Invalid(_))));
    }

    #[test]
    fn dot_rendering() {
        let datum = fixtures::loomis_whitney_datum(2, vec![ratio(1, 2); 3]);
        let dot = export_dot(&datum, &fixtures::loomis_whitney_presentation(2));
        assert!(dot.contains("v0 -> v1 [label=\"(1/2,1/2*,1/2*)\"]"));
        assert_eq!(dot.matches("->").count(), 3);

        let dot = export_dot(&fixtures::r6_datum(), &fixtures::r6_presentation());
        assert_eq!(dot.matches("[label=\"").count(), 8 + 8);
        assert!(dot.contains("v4 -> v5") && dot.contains("v4 -> v6"));

        let empty = Presentation::new(
            GraphDecomposition::new(2, vec![Subspace::zero(2), Subspace::full(2)], vec![]),
            WeightFunction::zeros(1, 0),
        )
        .unwrap();
        let dot = export_dot(&datum, &empty);
        assert!(dot.contains("v1 [label=\"R^2\"]"));
    }
}
