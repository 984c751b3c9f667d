//! Seeded generators for property tests and acceptance runs.

use std::collections::HashMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::flow::{GraphDecomposition, WeightFunction};
use crate::linalg::{Matrix, Subspace};
use crate::rational::{int, ratio, Rational};

/// Small-integer matrix with entries in `-2..=2`.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| int(rng.random_range(-2..=2))).collect();
    Matrix::from_vec(rows, cols, data).expect("sizes agree")
}

/// A maximal flag `{0} ⊂ V₁ ⊂ … ⊂ ℝ^m` spanned by successive random integer vectors.
pub fn random_flag<R: Rng>(rng: &mut R, m: usize) -> Vec<Subspace> {
    let mut flag = vec![Subspace::zero(m)];
    let mut vectors: Vec<Vec<Rational>> = Vec::new();
    while vectors.len() < m {
        let v: Vec<Rational> = (0..m).map(|_| int(rng.random_range(-2..=2))).collect();
        let mut trial = vectors.clone();
        trial.push(v);
        let s = Subspace::from_vectors(m, trial.clone()).expect("width m");
        if s.dim() == trial.len() {
            vectors = trial;
            flag.push(s);
        }
    }
    flag
}

/// Union of `flags` random maximal flags, canonicalized.
pub fn random_flag_union<R: Rng>(rng: &mut R, m: usize, flags: usize) -> GraphDecomposition {
    let mut vertices: Vec<Subspace> = Vec::new();
    let mut index: HashMap<Subspace, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for _ in 0..flags.max(1) {
        let ids: Vec<usize> = random_flag(rng, m)
            .into_iter()
            .map(|s| {
                *index.entry(s.clone()).or_insert_with(|| {
                    vertices.push(s);
                    vertices.len() - 1
                })
            })
            .collect();
        for w in ids.windows(2) {
            if !edges.contains(&(w[0], w[1])) {
                edges.push((w[0], w[1]));
            }
        }
    }
    let mut g = GraphDecomposition::new(m, vertices, edges);
    g.canonicalize();
    g
}

/// A maximal chain from `{0}` to the full space, choosing uniformly among outgoing edges.
pub fn random_chain<R: Rng>(rng: &mut R, g: &GraphDecomposition) -> Vec<usize> {
    let full = g.full_index().expect("graph has the full space");
    let mut at = g.zero_index().expect("graph has zero");
    let mut chain = Vec::new();
    while at != full {
        let out: Vec<usize> = g.outgoing(at).collect();
        let k = *out.choose(rng).expect("valid graph has outgoing edges");
        chain.push(k);
        at = g.edges[k].1;
    }
    chain
}

/// Random positive rational `p/q` with `p ∈ 1..=5`, `q ∈ 1..=4`.
pub fn random_coefficient<R: Rng>(rng: &mut R) -> Rational {
    ratio(rng.random_range(1..=5), rng.random_range(1..=4))
}

/// Balanced weight of the given width built from up to `chains` random chains per component.
pub fn random_balanced_weight<R: Rng>(rng: &mut R, g: &GraphDecomposition, width: usize, chains: usize) -> WeightFunction {
    let mut w = WeightFunction::zeros(width, g.edges.len());
    for j in 0..width {
        for _ in 0..rng.random_range(0..=chains) {
            let c = random_coefficient(rng);
            for k in random_chain(rng, g) {
                let v = w.get(k, j) + &c;
                w.set(k, j, v);
            }
        }
    }
    w
}

/// Random signed permutation matrix.
pub fn random_signed_permutation<R: Rng>(rng: &mut R, m: usize) -> Matrix {
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(rng);
    let mut t = Matrix::zeros(m, m);
    for (i, &p) in perm.iter().enumerate() {
        let sign = if rng.random_bool(0.5) { 1 } else { -1 };
        t[(i, p)] = int(sign);
    }
    t
}

/// Integer matrix with determinant ±1: a signed permutation times random shears.
pub fn random_unimodular<R: Rng>(rng: &mut R, m: usize) -> Matrix {
    let mut t = random_signed_permutation(rng, m);
    if m < 2 {
        return t;
    }
    for _ in 0..2 * m {
        let i = rng.random_range(0..m);
        let mut j = rng.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        let c = int(rng.random_range(-2..=2));
        let mut shear = Matrix::identity(m);
        shear[(i, j)] = c;
        t = shear.mul(&t).expect("square");
    }
    t
}
