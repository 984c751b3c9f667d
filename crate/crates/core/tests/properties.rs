use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hblcert::builder::{build_presentation, caratheodory, enumerate_extremes, polytope_from_candidates, BuildOptions};
use hblcert::flow::{decompose_flow, imbalances, project_weight, total_mass};
use hblcert::random::{random_balanced_weight, random_flag_union, random_matrix};
use hblcert::rational::{format_rational, parse_rational, ratio};
use hblcert::{verify_presentation, HblDatum, Matrix, Rational, Subspace};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn subspace(seed: u64, m: usize) -> Subspace {
    let mut r = rng(seed);
    let k = (seed % (m as u64 + 1)) as usize;
    Subspace::span(m, &random_matrix(&mut r, k, m)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_identities(a in any::<u64>(), b in any::<u64>(), m in 1usize..=5) {
        let u = subspace(a, m);
        let w = subspace(b, m);
        let sum = u.sum(&w).unwrap();
        let meet = u.intersect(&w).unwrap();
        prop_assert_eq!(sum.dim() + meet.dim(), u.dim() + w.dim());
        prop_assert!(u.is_subspace_of(&sum) && w.is_subspace_of(&sum));
        prop_assert!(meet.is_subspace_of(&u) && meet.is_subspace_of(&w));
        prop_assert_eq!(u.orthogonal_complement().dim(), m - u.dim());
        prop_assert_eq!(u.orthogonal_complement().orthogonal_complement(), u.clone());
        prop_assert_eq!(u.sum(&u.orthogonal_complement()).unwrap(), Subspace::full(m));
    }

    #[test]
    fn rank_nullity_and_preimage(seed in any::<u64>(), m in 1usize..=5, r in 1usize..=4) {
        let mut g = rng(seed);
        let map = random_matrix(&mut g, r, m);
        let kernel = Subspace::kernel(&map);
        prop_assert_eq!(kernel.dim() + map.rank(), m);
        let u = subspace(seed ^ 0x5a5a, m);
        let back = u.image(&map).unwrap().preimage(&map).unwrap();
        prop_assert_eq!(back, u.sum(&kernel).unwrap());
    }

    #[test]
    fn rationals_round_trip(n in -1000i64..1000, d in 1i64..1000) {
        let q = ratio(n, d);
        prop_assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
    }

    #[test]
    fn chain_decomposition_reconstructs(seed in any::<u64>(), m in 1usize..=6, n in 1usize..=4, flags in 1usize..=4) {
        let mut g = rng(seed);
        let graph = random_flag_union(&mut g, m, flags);
        let w = random_balanced_weight(&mut g, &graph, n, 4);
        let dec = decompose_flow(&graph, &w).unwrap();
        prop_assert_eq!(dec.reconstruct(graph.edges.len()), w.clone());
        prop_assert!(dec.terms.len() <= graph.edges.len() * n);
        prop_assert!(dec.terms.iter().all(|t| t.coefficient.is_positive()));
        prop_assert_eq!(dec.coefficient_sums(), total_mass(&graph, &w).unwrap());
    }

    #[test]
    fn projection_keeps_balance_and_mass(seed in any::<u64>(), m in 1usize..=5, n in 1usize..=3) {
        let mut g = rng(seed);
        let graph = random_flag_union(&mut g, m, 3);
        let w = random_balanced_weight(&mut g, &graph, n, 3);
        let map = random_matrix(&mut g, m, m);
        prop_assume!(map.rank() > 0);
        let (pg, pw) = project_weight(&graph, &w, &map).unwrap();
        prop_assert!(pg.graph.validate().is_empty());
        prop_assert!(imbalances(&pg.graph, &pw).unwrap().is_empty());
        prop_assert_eq!(total_mass(&pg.graph, &pw).unwrap(), total_mass(&graph, &w).unwrap());
        prop_assert_eq!(pg.graph.ambient, map.rank());
    }
}

/// Random maps on ℝᵐ, with τ a random convex combination of the extreme points
/// of the polytope cut out by the closed kernel lattice.
fn feasible_datum(seed: u64) -> Option<(HblDatum, Vec<Subspace>)> {
    let mut g = rng(seed);
    let m = 2 + (seed % 2) as usize;
    let n = 2 + (seed / 2 % 2) as usize;
    let maps: Vec<Matrix> = (0..n)
        .map(|i| random_matrix(&mut g, 1 + (seed as usize + i) % m, m))
        .collect();
    if maps.iter().any(|p| p.rank() == 0) {
        return None;
    }
    let probe = HblDatum::from_matrices(m, maps.clone(), vec![Rational::one(); n]).ok()?;
    let lattice = probe.generate_lattice(&[], 512).ok()?;
    if !lattice.closed {
        return None;
    }
    let poly = polytope_from_candidates(&probe, &lattice.subspaces).ok()?;
    let ext = enumerate_extremes(&poly, 100_000);
    if ext.points.is_empty() || ext.cap_hit {
        return None;
    }
    let weights: Vec<Rational> = (0..ext.points.len()).map(|k| ratio(1 + ((seed >> k) & 3) as i64, 1)).collect();
    let total: Rational = weights.iter().sum();
    let tau: Vec<Rational> = (0..n)
        .map(|i| ext.points.iter().zip(&weights).map(|(p, w)| &p[i] * w).sum::<Rational>() / &total)
        .collect();
    let datum = HblDatum::from_matrices(m, maps, tau).ok()?;
    Some((datum, lattice.subspaces))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn caratheodory_round_trip(seed in any::<u64>()) {
        let Some((datum, lattice)) = feasible_datum(seed) else { return Ok(()) };
        let poly = polytope_from_candidates(&datum, &lattice).unwrap();
        let dec = caratheodory(&poly, datum.exponents()).unwrap();
        prop_assert_eq!(dec.combine(), datum.exponents().to_vec());
        prop_assert!(dec.terms.len() <= datum.len() + 1);
        prop_assert!(dec.terms.iter().all(|(c, _)| c.is_positive()));
        let total: Rational = dec.terms.iter().map(|(c, _)| c.clone()).sum();
        prop_assert!((total - Rational::one()).is_zero());
    }

    #[test]
    fn builder_output_verifies(seed in any::<u64>()) {
        let Some((datum, lattice)) = feasible_datum(seed) else { return Ok(()) };
        let out = build_presentation(&datum, &lattice, &BuildOptions::default())
            .map_err(|e| TestCaseError::fail(format!("{e}")))?;
        prop_assert!(verify_presentation(&datum, &out.presentation).valid());
    }
}

#[test]
fn feasible_generator_is_not_vacuous() {
    let made = (0..64).filter(|&s| feasible_datum(s).is_some()).count();
    assert!(made >= 32, "{made}/64");
}
