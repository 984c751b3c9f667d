//! Reference data: the Loomis–Whitney family and a four-map datum on ℝ⁶.
//!
//! The same objects ship as JSON files under `fixtures/`; the integration
//! tests check that both agree.

use crate::datum::HblDatum;
use crate::flow::{GraphDecomposition, WeightFunction};
use crate::linalg::{Matrix, Subspace};
use crate::presentation::Presentation;
use crate::rational::{int, ratio, Rational};

/// `πᵢ` drops coordinate `i` of ℝ^{d+1}.
pub fn loomis_whitney_maps(d: usize) -> Vec<Matrix> {
    let m = d + 1;
    (0..m)
        .map(|skip| {
            let rows: Vec<Vec<Rational>> = (0..m)
                .filter(|&c| c != skip)
                .map(|c| (0..m).map(|k| int((k == c) as i64)).collect())
                .collect();
            Matrix::from_rows(m, rows).unwrap()
        })
        .collect()
}

pub fn loomis_whitney_datum(d: usize, exponents: Vec<Rational>) -> HblDatum {
    HblDatum::from_matrices(d + 1, loomis_whitney_maps(d), exponents).expect("valid Loomis-Whitney datum")
}

/// Coordinate flag `{0} ⊂ span{e₁} ⊂ … ⊂ ℝᵐ` as a chain graph.
pub fn coordinate_chain(m: usize) -> GraphDecomposition {
    let vertices = (0..=m)
        .map(|k| Subspace::coordinate(m, &(0..k).collect::<Vec<_>>()))
        .collect();
    let edges = (0..m).map(|k| (k, k + 1)).collect();
    GraphDecomposition::new(m, vertices, edges)
}

/// Chain presentation with every θᵢ equal to `1/d` on every edge.
pub fn loomis_whitney_presentation(d: usize) -> Presentation {
    let graph = coordinate_chain(d + 1);
    let row = vec![ratio(1, d as i64); d + 1];
    let theta = WeightFunction::new(d + 1, vec![row; d + 1]).unwrap();
    Presentation::new(graph, theta).unwrap()
}

/// π₁ = (x₁,x₂,x₅), π₂ = (x₂,x₃,x₅+x₆), π₃ = (x₄,x₆), π₄ = (x₁,x₃,x₄,x₅−x₆); τ = ½ each.
pub fn r6_datum() -> HblDatum {
    let maps = vec![
        Matrix::from_i64(6, &[&[1, 0, 0, 0, 0, 0], &[0, 1, 0, 0, 0, 0], &[0, 0, 0, 0, 1, 0]]),
        Matrix::from_i64(6, &[&[0, 1, 0, 0, 0, 0], &[0, 0, 1, 0, 0, 0], &[0, 0, 0, 0, 1, 1]]),
        Matrix::from_i64(6, &[&[0, 0, 0, 1, 0, 0], &[0, 0, 0, 0, 0, 1]]),
        Matrix::from_i64(
            6,
            &[&[1, 0, 0, 0, 0, 0], &[0, 0, 1, 0, 0, 0], &[0, 0, 0, 1, 0, 0], &[0, 0, 0, 0, 1, -1]],
        ),
    ];
    HblDatum::from_matrices(6, maps, vec![ratio(1, 2); 4]).unwrap()
}

/// `V₆ = span{e₁,e₂,e₃,e₄,e₅+e₆}`.
pub fn r6_v6() -> Subspace {
    Subspace::span(
        6,
        &Matrix::from_i64(
            6,
            &[
                &[1, 0, 0, 0, 0, 0],
                &[0, 1, 0, 0, 0, 0],
                &[0, 0, 1, 0, 0, 0],
                &[0, 0, 0, 1, 0, 0],
                &[0, 0, 0, 0, 1, 1],
            ],
        ),
    )
    .unwrap()
}

/// Vertex order: `{0}, V₁, …, V₅, V₆, ℝ⁶`. Edge order follows the diagram:
/// the four chain edges, then `V₄→V₅`, `V₄→V₆`, `V₅→ℝ⁶`, `V₆→ℝ⁶`.
pub fn r6_presentation() -> Presentation {
    let mut vertices: Vec<Subspace> = (0..=5)
        .map(|k| Subspace::coordinate(6, &(0..k).collect::<Vec<_>>()))
        .collect();
    vertices.push(r6_v6());
    vertices.push(Subspace::full(6));
    let edges = vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (4, 6), (5, 7), (6, 7)];
    let h = ratio(1, 2);
    let z = int(0);
    let all = vec![h.clone(); 4];
    let upper = vec![h.clone(), z.clone(), h.clone(), z.clone()];
    let lower = vec![z.clone(), h.clone(), z, h];
    let theta = WeightFunction::new(
        4,
        vec![all.clone(), all.clone(), all.clone(), all, upper.clone(), lower.clone(), upper, lower],
    )
    .unwrap();
    Presentation::new(GraphDecomposition::new(6, vertices, edges), theta).unwrap()
}

/// The four coordinate lines `span{e₁}, …, span{e₄}` of ℝ⁶.
pub fn r6_line_candidates() -> Vec<Subspace> {
    (0..4).map(|i| Subspace::coordinate(6, &[i])).collect()
}
