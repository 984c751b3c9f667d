//! Hölder–Brascamp–Lieb data and the dimension conditions on subspaces.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::linalg::{LinalgError, Matrix, Subspace};
use crate::rational::{format_rational, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatumError {
    #[error("datum needs at least one map")]
    NoMaps,
    #[error("{maps} maps but {exponents} exponents")]
    ExponentCount { maps: usize, exponents: usize },
    #[error("map {name:?} has {found} columns, ambient dimension is {expected}")]
    MapWidth {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("exponent {index} = {value} lies outside [0,1]")]
    ExponentRange { index: usize, value: String },
    #[error("subspace lives in R^{found}, datum ambient is R^{expected}")]
    Ambient { expected: usize, found: usize },
    #[error("restriction to the zero subspace is undefined")]
    RestrictToZero,
    #[error("quotient by the full space is undefined")]
    QuotientByFull,
    #[error("transform {which} is singular or has the wrong shape")]
    SingularTransform { which: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedMap {
    pub name: String,
    pub matrix: Matrix,
}

/// Ambient dimension, linear maps πᵢ and exponents τᵢ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HblDatum {
    dim: usize,
    maps: Vec<NamedMap>,
    exponents: Vec<Rational>,
}

impl HblDatum {
    pub fn new(dim: usize, maps: Vec<NamedMap>, exponents: Vec<Rational>) -> Result<Self, DatumError> {
        if maps.is_empty() {
            return Err(DatumError::NoMaps);
        }
        if maps.len() != exponents.len() {
            return Err(DatumError::ExponentCount {
                maps: maps.len(),
                exponents: exponents.len(),
            });
        }
        for m in &maps {
            if m.matrix.cols() != dim {
                return Err(DatumError::MapWidth {
                    name: m.name.clone(),
                    expected: dim,
                    found: m.matrix.cols(),
                });
            }
        }
        for (index, t) in exponents.iter().enumerate() {
            if t.is_negative() || *t > Rational::one() {
                return Err(DatumError::ExponentRange {
                    index,
                    value: format_rational(t),
                });
            }
        }
        Ok(HblDatum {
            dim,
            maps,
            exponents,
        })
    }

    /// Convenience constructor naming maps `pi1`, `pi2`, ….
    pub fn from_matrices(dim: usize, maps: Vec<Matrix>, exponents: Vec<Rational>) -> Result<Self, DatumError> {
        let maps = maps
            .into_iter()
            .enumerate()
            .map(|(i, matrix)| NamedMap {
                name: format!("pi{}", i + 1),
                matrix,
            })
            .collect();
        Self::new(dim, maps, exponents)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn maps(&self) -> &[NamedMap] {
        &self.maps
    }

    pub fn map(&self, i: usize) -> &Matrix {
        &self.maps[i].matrix
    }

    pub fn exponents(&self) -> &[Rational] {
        &self.exponents
    }

    pub fn with_exponents(&self, exponents: Vec<Rational>) -> Result<Self, DatumError> {
        Self::new(self.dim, self.maps.clone(), exponents)
    }

    pub fn full(&self) -> Subspace {
        Subspace::full(self.dim)
    }

    pub fn rank(&self, i: usize) -> usize {
        self.map(i).rank()
    }

    pub fn image(&self, i: usize, v: &Subspace) -> Result<Subspace, DatumError> {
        self.check(v)?;
        Ok(v.image(self.map(i))?)
    }

    /// `dim πᵢ(V)` for every map.
    pub fn image_dims(&self, v: &Subspace) -> Result<Vec<usize>, DatumError> {
        (0..self.len())
            .map(|i| self.image(i, v).map(|s| s.dim()))
            .collect()
    }

    fn check(&self, v: &Subspace) -> Result<(), DatumError> {
        if v.ambient() != self.dim {
            return Err(DatumError::Ambient {
                expected: self.dim,
                found: v.ambient(),
            });
        }
        Ok(())
    }

    /// `m` against `Σ τᵢ·rank πᵢ`.
    pub fn check_scaling(&self) -> ScalingCheck {
        let lhs = int(self.dim as i64);
        let rhs = (0..self.len()).fold(Rational::zero(), |acc, i| {
            acc + &self.exponents[i] * int(self.rank(i) as i64)
        });
        ScalingCheck {
            holds: lhs == rhs,
            lhs,
            rhs,
        }
    }

    pub fn subspace_slack(&self, v: &Subspace) -> Result<SlackReport, DatumError> {
        let dims = self.image_dims(v)?;
        let weighted = dims
            .iter()
            .zip(&self.exponents)
            .fold(Rational::zero(), |acc, (&d, t)| acc + t * int(d as i64));
        let slack = weighted - int(v.dim() as i64);
        let classification = if v.is_full() {
            SlackClass::Scaling
        } else if slack.is_negative() {
            SlackClass::Violating
        } else if v.is_zero() {
            SlackClass::Trivial
        } else if slack.is_zero() {
            SlackClass::Critical
        } else {
            SlackClass::SlackPositive
        };
        Ok(SlackReport {
            subspace: v.clone(),
            image_dims: dims,
            slack,
            classification,
        })
    }

    /// The full space if scaling fails, else the first violating candidate in lattice order.
    pub fn find_violation(&self, candidates: &CandidateLattice) -> Result<Option<SlackReport>, DatumError> {
        let top = self.subspace_slack(&self.full())?;
        if !top.slack.is_zero() {
            return Ok(Some(top));
        }
        let mut sorted: Vec<&Subspace> = candidates.subspaces.iter().collect();
        sorted.sort();
        for v in sorted {
            let r = self.subspace_slack(v)?;
            if r.slack.is_negative() {
                return Ok(Some(r));
            }
        }
        Ok(None)
    }

    /// Proper nonzero candidates with zero slack, ordered by dimension then basis.
    pub fn find_critical(&self, candidates: &CandidateLattice) -> Result<Vec<SlackReport>, DatumError> {
        let mut out = Vec::new();
        for v in &candidates.subspaces {
            let r = self.subspace_slack(v)?;
            if r.classification == SlackClass::Critical {
                out.push(r);
            }
        }
        out.sort_by(|a, b| a.subspace.cmp(&b.subspace));
        Ok(out)
    }

    /// Closure of `{0}, H, ker πᵢ, seeds` under sum and intersection, capped at `max_size`.
    pub fn generate_lattice(&self, seeds: &[Subspace], max_size: usize) -> Result<CandidateLattice, DatumError> {
        for s in seeds {
            self.check(s)?;
        }
        let mut initial = vec![
            (Subspace::zero(self.dim), "zero subspace".to_string()),
            (self.full(), "full space".to_string()),
        ];
        for m in &self.maps {
            initial.push((Subspace::kernel(&m.matrix), format!("ker {}", m.name)));
        }
        for (k, s) in seeds.iter().enumerate() {
            initial.push((s.clone(), format!("seed {k}")));
        }

        let mut elems: Vec<Subspace> = Vec::new();
        let mut log = Vec::new();
        let mut seen = HashSet::new();
        let mut truncated = false;
        for (s, why) in initial {
            if seen.contains(&s) {
                continue;
            }
            if elems.len() >= max_size.max(2) {
                truncated = true;
                break;
            }
            seen.insert(s.clone());
            elems.push(s);
            log.push(why);
        }

        // Each pair is combined once; new elements get paired with everything before them.
        let mut processed = 0;
        'outer: while processed < elems.len() && !truncated {
            let j = processed;
            for i in 0..j {
                let pair = [
                    (elems[i].sum(&elems[j])?, "sum"),
                    (elems[i].intersect(&elems[j])?, "intersection"),
                ];
                for (s, op) in pair {
                    if seen.contains(&s) {
                        continue;
                    }
                    if elems.len() >= max_size {
                        truncated = true;
                        break 'outer;
                    }
                    seen.insert(s.clone());
                    log.push(format!("{op} of #{i} and #{j}"));
                    elems.push(s);
                }
            }
            processed += 1;
        }

        let mut order: Vec<usize> = (0..elems.len()).collect();
        order.sort_by(|&a, &b| elems[a].cmp(&elems[b]));
        Ok(CandidateLattice {
            subspaces: order.iter().map(|&k| elems[k].clone()).collect(),
            generation_log: order.iter().map(|&k| log[k].clone()).collect(),
            closed: !truncated,
        })
    }

    /// Datum on `V`, using the RREF basis of `V` as coordinates.
    ///
    /// The returned embedding is `m × dim V`; its columns are the basis vectors of `V`.
    pub fn restrict(&self, v: &Subspace) -> Result<(HblDatum, Matrix), DatumError> {
        self.check(v)?;
        if v.is_zero() {
            return Err(DatumError::RestrictToZero);
        }
        let embedding = v.basis().transpose();
        let maps = self
            .maps
            .iter()
            .map(|m| {
                Ok(NamedMap {
                    name: m.name.clone(),
                    matrix: m.matrix.mul(&embedding)?,
                })
            })
            .collect::<Result<Vec<_>, LinalgError>>()?;
        Ok((
            HblDatum::new(v.dim(), maps, self.exponents.clone())?,
            embedding,
        ))
    }

    /// Datum on `V⊥` with maps `Pᵢ·πᵢ`, where `Pᵢ` projects onto `πᵢ(V)⊥`.
    ///
    /// The embedding columns are the RREF basis of `V⊥`.
    pub fn quotient(&self, v: &Subspace) -> Result<(HblDatum, Matrix), DatumError> {
        self.check(v)?;
        if v.is_full() {
            return Err(DatumError::QuotientByFull);
        }
        let complement = v.orthogonal_complement();
        let embedding = complement.basis().transpose();
        let maps = self
            .maps
            .iter()
            .map(|m| {
                let projector = v.image(&m.matrix)?.complement_projection_matrix();
                Ok(NamedMap {
                    name: m.name.clone(),
                    matrix: projector.mul(&m.matrix)?.mul(&embedding)?,
                })
            })
            .collect::<Result<Vec<_>, LinalgError>>()?;
        Ok((
            HblDatum::new(complement.dim(), maps, self.exponents.clone())?,
            embedding,
        ))
    }

    /// Change of variables: maps become `Sᵢ·πᵢ·T⁻¹`.
    pub fn transform(&self, t: &Matrix, s: &[Matrix]) -> Result<HblDatum, DatumError> {
        let singular = |which: String| DatumError::SingularTransform { which };
        if t.rows() != self.dim {
            return Err(singular("T".into()));
        }
        let t_inv = t.inverse().ok_or_else(|| singular("T".into()))?;
        if s.len() != self.len() {
            return Err(singular("S (count)".into()));
        }
        let maps = self
            .maps
            .iter()
            .zip(s)
            .enumerate()
            .map(|(i, (m, si))| {
                if si.rows() != m.matrix.rows() || si.inverse().is_none() {
                    return Err(singular(format!("S{}", i + 1)));
                }
                Ok(NamedMap {
                    name: m.name.clone(),
                    matrix: si.mul(&m.matrix)?.mul(&t_inv)?,
                })
            })
            .collect::<Result<Vec<_>, DatumError>>()?;
        HblDatum::new(self.dim, maps, self.exponents.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalingCheck {
    pub holds: bool,
    pub lhs: Rational,
    pub rhs: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlackClass {
    /// `Σ τᵢ dim πᵢ(V) < dim V` for a proper subspace.
    Violating,
    /// Zero slack on a proper nonzero subspace.
    Critical,
    /// `V = H`; the slack must be zero for the scaling condition.
    Scaling,
    SlackPositive,
    /// The zero subspace, where the condition is vacuous.
    Trivial,
}

impl fmt::Display for SlackClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlackClass::Violating => "violating",
            SlackClass::Critical => "critical",
            SlackClass::Scaling => "scaling",
            SlackClass::SlackPositive => "slack-positive",
            SlackClass::Trivial => "trivial",
        })
    }
}

/// Slack `Σ τᵢ dim πᵢ(V) − dim V` of one subspace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackReport {
    pub subspace: Subspace,
    pub image_dims: Vec<usize>,
    pub slack: Rational,
    pub classification: SlackClass,
}

/// Finite family of subspaces standing in for "all subspaces".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateLattice {
    pub subspaces: Vec<Subspace>,
    pub closed: bool,
    pub generation_log: Vec<String>,
}

impl CandidateLattice {
    /// Wraps an explicit list, deduplicated and sorted; `{0}` and `H` are added.
    pub fn from_subspaces(ambient: usize, subspaces: impl IntoIterator<Item = Subspace>) -> Self {
        let mut all: Vec<Subspace> = subspaces.into_iter().collect();
        all.push(Subspace::zero(ambient));
        all.push(Subspace::full(ambient));
        all.sort();
        all.dedup();
        CandidateLattice {
            generation_log: vec!["given".to_string(); all.len()],
            subspaces: all,
            closed: false,
        }
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::ratio;

    fn half4() -> Vec<Rational> {
        vec![ratio(1, 2); 4]
    }

    #[test]
    fn scaling_examples() {
        let r6 = fixtures::r6_datum();
        let s = r6.check_scaling();
        assert!(s.holds);
        assert_eq!((s.lhs, s.rhs), (int(6), int(6)));

        let lw = fixtures::loomis_whitney_datum(2, vec![ratio(1, 2); 3]);
        let s = lw.check_scaling();
        assert!(s.holds);
        assert_eq!(s.rhs, int(3));

        let lw = fixtures::loomis_whitney_datum(2, vec![int(1); 3]);
        let s = lw.check_scaling();
        assert!(!s.holds);
        assert_eq!((s.lhs, s.rhs), (int(3), int(6)));
    }

    #[test]
    fn slack_examples() {
        let r6 = fixtures::r6_datum().with_exponents(half4()).unwrap();
        let r = r6.subspace_slack(&Subspace::coordinate(6, &[0])).unwrap();
        assert_eq!(r.image_dims, vec![1, 0, 0, 1]);
        assert_eq!(r.slack, int(0));
        assert_eq!(r.classification, SlackClass::Critical);

        let r = r6.subspace_slack(&Subspace::coordinate(6, &[0, 1, 2, 3])).unwrap();
        assert_eq!(r.image_dims, vec![2, 2, 1, 3]);
        assert_eq!(r.classification, SlackClass::Critical);

        let lw = fixtures::loomis_whitney_datum(2, vec![ratio(3, 4), ratio(3, 4), int(0)]);
        let r = lw.subspace_slack(&Subspace::coordinate(3, &[0])).unwrap();
        assert_eq!(r.image_dims, vec![0, 1, 1]);
        assert_eq!(r.slack, ratio(-1, 4));
        assert_eq!(r.classification, SlackClass::Violating);

        assert!(lw.subspace_slack(&Subspace::zero(2)).is_err());
    }

    #[test]
    fn top_slack_matches_scaling() {
        let lw = fixtures::loomis_whitney_datum(2, vec![int(1); 3]);
        let s = lw.check_scaling();
        let r = lw.subspace_slack(&lw.full()).unwrap();
        assert_eq!(r.slack, s.rhs - s.lhs);
    }

    #[test]
    fn loomis_whitney_lattice() {
        let lw = fixtures::loomis_whitney_datum(2, vec![ratio(1, 2); 3]);
        let lat = lw.generate_lattice(&[], 512).unwrap();
        assert!(lat.closed);
        assert_eq!(lat.len(), 8);
        for i in 0..3 {
            assert!(lat.subspaces.contains(&Subspace::coordinate(3, &[i])));
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!(lat.subspaces.contains(&Subspace::coordinate(3, &[a, b])));
        }
    }

    #[test]
    fn injective_map_adds_nothing() {
        let d = HblDatum::from_matrices(2, vec![Matrix::identity(2)], vec![int(1)]).unwrap();
        let lat = d.generate_lattice(&[], 16).unwrap();
        assert_eq!(lat.subspaces, vec![Subspace::zero(2), Subspace::full(2)]);
        assert!(lat.closed);
    }

    #[test]
    fn truncated_lattice() {
        let lw = fixtures::loomis_whitney_datum(2, vec![ratio(1, 2); 3]);
        let lat = lw.generate_lattice(&[], 2).unwrap();
        assert_eq!(lat.subspaces, vec![Subspace::zero(3), Subspace::full(3)]);
        assert!(!lat.closed);
    }

    #[test]
    fn violation_and_critical_search() {
        let lw = fixtures::loomis_whitney_datum(2, vec![ratio(3, 4), ratio(3, 4), int(0)]);
        let lat = lw.generate_lattice(&[], 512).unwrap();
        let v = lw.find_violation(&lat).unwrap().unwrap();
        assert_eq!(v.subspace, Subspace::coordinate(3, &[0]));
        assert_eq!(v.slack, ratio(-1, 4));

        let ok = fixtures::loomis_whitney_datum(2, vec![ratio(1, 2); 3]);
        assert!(ok.find_violation(&lat).unwrap().is_none());

        let r6 = fixtures::r6_datum();
        let lat = r6
            .generate_lattice(&[Subspace::coordinate(6, &[0, 1, 2, 3])], 512)
            .unwrap();
        let crit = r6.find_critical(&lat).unwrap();
        let subs: Vec<_> = crit.iter().map(|r| r.subspace.clone()).collect();
        assert!(subs.contains(&Subspace::coordinate(6, &[0])));
        assert!(subs.contains(&Subspace::coordinate(6, &[0, 1, 2, 3])));
        assert!(crit.windows(2).all(|w| w[0].subspace.dim() <= w[1].subspace.dim()));
    }

    #[test]
    fn restriction_examples() {
        let lw = fixtures::loomis_whitney_datum(2, vec![ratio(1, 2); 3]);
        let (low, emb) = lw.restrict(&Subspace::coordinate(3, &[0, 1])).unwrap();
        assert_eq!(low.dim(), 2);
        assert_eq!(emb.cols(), 2);
        assert_eq!(low.map(0), &Matrix::from_i64(2, &[&[0, 1], &[0, 0]]));
        assert_eq!(low.map(1), &Matrix::from_i64(2, &[&[1, 0], &[0, 0]]));
        assert_eq!(low.map(2), &Matrix::identity(2));

        let (same, _) = lw.restrict(&lw.full()).unwrap();
        assert_eq!(same, lw);

        let r6 = fixtures::r6_datum();
        let (line, _) = r6.restrict(&Subspace::coordinate(6, &[0])).unwrap();
        assert_eq!((0..4).map(|i| line.rank(i)).collect::<Vec<_>>(), vec![1, 0, 0, 1]);

        assert_eq!(lw.restrict(&Subspace::zero(3)), Err(DatumError::RestrictToZero));
    }

    #[test]
    fn quotient_examples() {
        let r6 = fixtures::r6_datum();
        let (q, emb) = r6.quotient(&Subspace::coordinate(6, &[0, 1, 2, 3])).unwrap();
        assert_eq!(q.dim(), 2);
        assert_eq!(emb, Subspace::coordinate(6, &[4, 5]).basis().transpose());
        // columns: e5, e6
        let p1 = q.map(0);
        assert_eq!(p1.column(0), vec![int(0), int(0), int(1)]);
        assert!(p1.column(1).iter().all(Zero::is_zero));

        let (same, _) = r6.quotient(&Subspace::zero(6)).unwrap();
        assert_eq!(same, r6);

        let lw = fixtures::loomis_whitney_datum(2, vec![ratio(1, 2); 3]);
        let (q, _) = lw.quotient(&Subspace::coordinate(3, &[0, 1])).unwrap();
        assert_eq!(q.dim(), 1);
        assert_eq!((0..3).map(|i| q.rank(i)).collect::<Vec<_>>(), vec![1, 1, 0]);

        assert_eq!(lw.quotient(&lw.full()), Err(DatumError::QuotientByFull));
    }

    #[test]
    fn transform_examples() {
        let lw = fixtures::loomis_whitney_datum(2, vec![ratio(1, 2); 3]);
        let ids: Vec<Matrix> = (0..3).map(|_| Matrix::identity(2)).collect();
        assert_eq!(lw.transform(&Matrix::identity(3), &ids).unwrap(), lw);

        // swap x1 and x2, negate x3
        let t = Matrix::from_i64(3, &[&[0, 1, 0], &[1, 0, 0], &[0, 0, -1]]);
        let moved = lw.transform(&t, &ids).unwrap();
        let k = Subspace::kernel(moved.map(0));
        assert_eq!(k, Subspace::coordinate(3, &[1]));

        let shear = Matrix::from_i64(3, &[&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]]);
        let sheared = lw.transform(&shear, &ids).unwrap();
        let lat = lw.generate_lattice(&[], 64).unwrap();
        for v in &lat.subspaces {
            let a = lw.subspace_slack(v).unwrap().slack;
            let b = sheared.subspace_slack(&v.image(&shear).unwrap()).unwrap().slack;
            assert_eq!(a, b);
        }

        let singular = Matrix::from_i64(3, &[&[1, 1, 0], &[1, 1, 0], &[0, 0, 1]]);
        assert!(lw.transform(&singular, &ids).is_err());
    }

    #[test]
    fn rejects_bad_exponents() {
        let err = HblDatum::from_matrices(1, vec![Matrix::identity(1)], vec![ratio(3, 2)]);
        assert!(matches!(err, Err(DatumError::ExponentRange { .. })));
        let err = HblDatum::from_matrices(2, vec![Matrix::identity(1)], vec![int(1)]);
        assert!(matches!(err, Err(DatumError::MapWidth { .. })));
    }
}
