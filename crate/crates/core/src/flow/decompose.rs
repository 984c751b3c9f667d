use num_traits::{Signed, Zero};

use super::{imbalances, FlowError, GraphDecomposition, WeightFunction};
use crate::rational::Rational;

/// `coefficient` times the indicator of `chain`, in component `component`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainTerm {
    pub component: usize,
    pub coefficient: Rational,
    /// Edge indices from `{0}` to the full space, in order.
    pub chain: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDecomposition {
    pub width: usize,
    pub terms: Vec<ChainTerm>,
}

impl ChainDecomposition {
    /// Sums the terms back into an edge weight.
    pub fn reconstruct(&self, edges: usize) -> WeightFunction {
        let mut w = WeightFunction::zeros(self.width, edges);
        for t in &self.terms {
            for &e in &t.chain {
                let v = w.get(e, t.component) + &t.coefficient;
                w.set(e, t.component, v);
            }
        }
        w
    }

    /// Sum of coefficients per component.
    pub fn coefficient_sums(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.width];
        for t in &self.terms {
            out[t.component] += &t.coefficient;
        }
        out
    }
}

/// Writes a balanced nonnegative weight as a sum of chain indicators.
///
/// Each step takes the smallest positive entry `δ = φ(e)ⱼ` (first in edge
/// order, then component order), extends `e` to a maximal chain along edges
/// whose `j`-th component is positive (lowest edge index wins), and subtracts
/// `δ` along it. Every step zeroes at least one entry.
pub fn decompose_flow(g: &GraphDecomposition, phi: &WeightFunction) -> Result<ChainDecomposition, FlowError> {
    if let Some((edge, component)) = phi.first_negative() {
        return Err(FlowError::Negative { edge, component });
    }
    if let Some(b) = imbalances(g, phi)?.first() {
        return Err(FlowError::Unbalanced {
            vertex: b.vertex,
            component: b.component,
        });
    }
    let violations = g.validate();
    if let Some(v) = violations.first() {
        return Err(FlowError::InvalidGraph(v.to_string()));
    }
    let zero = g.zero_index().expect("validated");
    let full = g.full_index().expect("validated");

    let mut rest = phi.clone();
    let mut terms = Vec::new();
    loop {
        let mut best: Option<(usize, usize, Rational)> = None;
        for (e, row) in rest.values().iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if x.is_positive() && best.as_ref().is_none_or(|b| *x < b.2) {
                    best = Some((e, j, x.clone()));
                }
            }
        }
        let Some((edge, j, delta)) = best else { break };

        let positive = |k: usize| rest.get(k, j).is_positive();
        let mut back = Vec::new();
        let mut at = g.edges[edge].0;
        while at != zero {
            let k = g
                .incoming(at)
                .find(|&k| positive(k))
                .ok_or(FlowError::Unbalanced { vertex: at, component: j })?;
            back.push(k);
            at = g.edges[k].0;
        }
        back.reverse();
        let mut chain = back;
        chain.push(edge);
        let mut at = g.edges[edge].1;
        while at != full {
            let k = g
                .outgoing(at)
                .find(|&k| positive(k))
                .ok_or(FlowError::Unbalanced { vertex: at, component: j })?;
            chain.push(k);
            at = g.edges[k].1;
        }

        for &k in &chain {
            let v = rest.get(k, j) - &delta;
            rest.set(k, j, v);
        }
        terms.push(ChainTerm {
            component: j,
            coefficient: delta,
            chain,
        });
    }
    Ok(ChainDecomposition {
        width: phi.width(),
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::presentation::summary_weight;
    use crate::rational::{int, ratio};

    #[test]
    fn r6_summary_weight_splits_at_diamond() {
        let d = fixtures::r6_datum();
        let p = fixtures::r6_presentation();
        let sigma = summary_weight(&d, &p).unwrap();
        let dec = decompose_flow(&p.graph, &sigma).unwrap();
        assert_eq!(dec.terms.len(), 2);
        for t in &dec.terms {
            assert_eq!(t.coefficient, ratio(1, 2));
            assert_eq!(t.chain.len(), 6);
        }
        // edge 4 is V₄→V₅, edge 5 is V₄→V₆
        assert!(dec.terms[0].chain.contains(&4));
        assert!(dec.terms[1].chain.contains(&5));
        assert_eq!(dec.reconstruct(p.graph.edge_count()), sigma);
    }

    #[test]
    fn zero_weight_has_no_terms() {
        let g = fixtures::coordinate_chain(3);
        let dec = decompose_flow(&g, &WeightFunction::zeros(2, 3)).unwrap();
        assert!(dec.terms.is_empty());
        assert_eq!(dec.coefficient_sums(), vec![int(0), int(0)]);
    }

    #[test]
    fn single_chain_single_term() {
        let g = fixtures::coordinate_chain(3);
        let w = WeightFunction::scalar(vec![ratio(2, 3); 3]);
        let dec = decompose_flow(&g, &w).unwrap();
        assert_eq!(
            dec.terms,
            vec![ChainTerm { component: 0, coefficient: ratio(2, 3), chain: vec![0, 1, 2] }]
        );
    }

    #[test]
    fn rejects_unbalanced_and_negative() {
        let g = fixtures::coordinate_chain(3);
        let w = WeightFunction::scalar(vec![int(1), int(2), int(1)]);
        assert!(matches!(decompose_flow(&g, &w), Err(FlowError::Unbalanced { .. })));
        let w = WeightFunction::scalar(vec![int(-1), int(-1), int(-1)]);
        assert!(matches!(decompose_flow(&g, &w), Err(FlowError::Negative { .. })));
    }
}
