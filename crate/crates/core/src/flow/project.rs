use std::collections::HashMap;

use super::{is_balanced, total_mass, FlowError, GraphDecomposition, WeightFunction};
use crate::linalg::{Matrix, Subspace};

/// Image of a graph decomposition under a linear map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectedGraph {
    pub graph: GraphDecomposition,
    /// Source vertex → projected vertex.
    pub vertex_map: Vec<usize>,
    /// Source edge → projected edge, `None` when both endpoints have the same image.
    pub edge_map: Vec<Option<usize>>,
}

/// Vertices are the distinct images `π(V)`; an edge joins two unequal images
/// whenever some source edge does. The result lives in `π(H)` expressed in
/// its own RREF chart, so its ambient dimension is `rank π`.
pub fn project_graph(g: &GraphDecomposition, map: &Matrix) -> Result<ProjectedGraph, FlowError> {
    if map.cols() != g.ambient {
        return Err(FlowError::MapWidth {
            expected: g.ambient,
            found: map.cols(),
        });
    }
    let range = Subspace::full(g.ambient)
        .image(map)
        .map_err(|e| FlowError::InvalidGraph(e.to_string()))?;
    let images: Vec<Subspace> = g
        .vertices
        .iter()
        .map(|v| {
            let img = v.image(map).expect("widths checked");
            to_chart(&range, &img)
        })
        .collect();

    let mut distinct: Vec<Subspace> = images.clone();
    distinct.sort();
    distinct.dedup();
    let index: HashMap<&Subspace, usize> = distinct.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let vertex_map: Vec<usize> = images.iter().map(|s| index[s]).collect();

    let mut edges = Vec::new();
    let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edge_map = Vec::with_capacity(g.edges.len());
    for &(a, b) in &g.edges {
        let (pa, pb) = (vertex_map[a], vertex_map[b]);
        if pa == pb {
            edge_map.push(None);
            continue;
        }
        let k = *edge_index.entry((pa, pb)).or_insert_with(|| {
            edges.push((pa, pb));
            edges.len() - 1
        });
        edge_map.push(Some(k));
    }
    Ok(ProjectedGraph {
        graph: GraphDecomposition::new(range.dim(), distinct, edges),
        vertex_map,
        edge_map,
    })
}

/// Pushforward `π(φ)(e) = Σ_{π(e') = e} φ(e')`.
///
/// Balance and total mass of the result are checked against the input,
/// and a mismatch is reported as an error rather than returned.
pub fn project_weight(
    g: &GraphDecomposition,
    phi: &WeightFunction,
    map: &Matrix,
) -> Result<(ProjectedGraph, WeightFunction), FlowError> {
    if phi.len() != g.edges.len() {
        return Err(FlowError::EdgeCount {
            expected: g.edges.len(),
            found: phi.len(),
        });
    }
    let proj = project_graph(g, map)?;
    let mut w = WeightFunction::zeros(phi.width(), proj.graph.edges.len());
    for (k, target) in proj.edge_map.iter().enumerate() {
        if let Some(t) = *target {
            for j in 0..phi.width() {
                let v = w.get(t, j) + phi.get(k, j);
                w.set(t, j, v);
            }
        }
    }
    if is_balanced(g, phi)? {
        if !is_balanced(&proj.graph, &w)? {
            return Err(FlowError::ProjectionInvariant("projected weight is unbalanced".into()));
        }
        if total_mass(&proj.graph, &w)? != total_mass(g, phi)? {
            return Err(FlowError::ProjectionInvariant("total mass changed under projection".into()));
        }
    }
    Ok((proj, w))
}

/// Coordinates of a subspace of `range` in the RREF chart of `range`.
fn to_chart(range: &Subspace, s: &Subspace) -> Subspace {
    let rows = (0..s.dim())
        .map(|i| range.coordinates(s.basis().row(i)).expect("image lies in range"))
        .collect();
    Subspace::from_vectors(range.dim(), rows).expect("chart width")
}
