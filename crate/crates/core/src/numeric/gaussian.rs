use nalgebra::{DMatrix, DVector, RowDVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::NumericError;
use crate::datum::HblDatum;
use crate::rational::to_f64;

/// One positive-definite matrix per map, acting on `πᵢ(H)` in the
/// orthonormal basis chosen by [`surjective_forms`].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianInput {
    pub matrices: Vec<DMatrix<f64>>,
}

impl GaussianInput {
    /// `Aᵢ = I` for every map.
    pub fn identity(datum: &HblDatum) -> Self {
        GaussianInput {
            matrices: (0..datum.len()).map(|i| DMatrix::identity(datum.rank(i), datum.rank(i))).collect(),
        }
    }

    /// `Aᵢ = exp(Sᵢ)` with `Sᵢ` symmetric Gaussian of the given scale.
    pub fn random(datum: &HblDatum, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GaussianInput {
            matrices: random_symmetric(datum, scale, &mut rng).iter().map(sym_exp).collect(),
        }
    }
}

/// `Mᵢ = Uᵢᵀπᵢ` where the columns of `Uᵢ` are an orthonormal basis of `πᵢ(H)`.
pub fn surjective_forms(datum: &HblDatum) -> Vec<DMatrix<f64>> {
    (0..datum.len())
        .map(|i| {
            let pi = datum.map(i).to_f64();
            let range = datum.full().image(datum.map(i)).expect("map width matches");
            if range.dim() == 0 {
                return DMatrix::zeros(0, datum.dim());
            }
            let q = range.basis().transpose().to_f64().qr().q();
            q.transpose() * pi
        })
        .collect()
}

fn evaluate(datum: &HblDatum, forms: &[DMatrix<f64>], g: &GaussianInput) -> Result<f64, NumericError> {
    if g.matrices.len() != datum.len() {
        return Err(NumericError::Shape {
            expected: format!("{} matrices", datum.len()),
            found: g.matrices.len().to_string(),
        });
    }
    let m = datum.dim();
    let mut sum = DMatrix::zeros(m, m);
    let mut log_num = 0.0;
    for (i, (a, form)) in g.matrices.iter().zip(forms).enumerate() {
        let r = form.nrows();
        if a.nrows() != r || a.ncols() != r {
            return Err(NumericError::Shape {
                expected: format!("{r}x{r} matrix for map {i}"),
                found: format!("{}x{}", a.nrows(), a.ncols()),
            });
        }
        let asym = (a - a.transpose()).amax();
        if asym > 1e-9 * a.amax().max(1.0) {
            return Err(NumericError::NotPositiveDefinite { map: i });
        }
        let chol = a.clone().cholesky().ok_or(NumericError::NotPositiveDefinite { map: i })?;
        let tau = to_f64(&datum.exponents()[i]);
        let log_det: f64 = chol.l().diagonal().iter().map(|x| 2.0 * x.ln()).sum();
        log_num += tau * log_det;
        sum += form.transpose() * a * form * tau;
    }
    let Some(chol) = sum.cholesky() else { return Ok(f64::INFINITY) };
    let log_den: f64 = chol.l().diagonal().iter().map(|x| 2.0 * x.ln()).sum();
    if !log_den.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 * (log_num - log_den))
}

/// `(∏ det(Aᵢ)^{τᵢ} / det(Σ τᵢ MᵢᵀAᵢMᵢ))^{1/2}`, the ratio of the two sides
/// of the inequality at `fᵢ(y) = exp(−π y·Aᵢy)`; `+∞` if the sum is singular.
pub fn gaussian_ratio(datum: &HblDatum, g: &GaussianInput) -> Result<f64, NumericError> {
    Ok(log_gaussian_ratio(datum, g)?.exp())
}

/// Log ratio with its gradient, one matrix per map.
pub type ValueGradient = (f64, Vec<DMatrix<f64>>);

type Trial = (Vec<Frame>, f64, Vec<DMatrix<f64>>);

pub fn log_gaussian_ratio(datum: &HblDatum, g: &GaussianInput) -> Result<f64, NumericError> {
    evaluate(datum, &surjective_forms(datum), g)
}

/// Gradient of the log ratio with respect to `Sᵢ`, where `Aᵢ = exp(Sᵢ)`.
///
/// Returned as symmetric matrices `Gᵢ` with `d log ratio = Σᵢ ⟨Gᵢ, dSᵢ⟩_F`.
/// `None` when the ratio is infinite at `S`.
pub fn log_ratio_gradient(datum: &HblDatum, s: &[DMatrix<f64>]) -> Result<Option<ValueGradient>, NumericError> {
    let forms = surjective_forms(datum);
    gradient_with(datum, &forms, s)
}

fn gradient_with(
    datum: &HblDatum,
    forms: &[DMatrix<f64>],
    s: &[DMatrix<f64>],
) -> Result<Option<ValueGradient>, NumericError> {
    if s.len() != datum.len() {
        return Err(NumericError::Shape {
            expected: format!("{} matrices", datum.len()),
            found: s.len().to_string(),
        });
    }
    let frames: Vec<Frame> = s
        .iter()
        .map(|x| {
            let e = x.clone().symmetric_eigen();
            Frame { u: e.eigenvectors, lam: e.eigenvalues }
        })
        .collect();
    let Some((value, blocks)) = leverage(datum, forms, &frames)? else { return Ok(None) };
    // In the eigenbasis of Sᵢ the block is −½·H_jk·φ(λ_j − λ_k) + ½τᵢ·δ_jk.
    let grads = frames
        .iter()
        .zip(&blocks)
        .enumerate()
        .map(|(i, (f, h))| {
            let tau = to_f64(&datum.exponents()[i]);
            let r = f.lam.len();
            let inner = DMatrix::from_fn(r, r, |j, k| -0.5 * h[(j, k)] * sinhc(f.lam[j] - f.lam[k]));
            &f.u * inner * f.u.transpose() + DMatrix::identity(r, r) * (0.5 * tau)
        })
        .collect::<Vec<_>>();
    if grads.iter().any(|g| g.iter().any(|x| !x.is_finite())) {
        return Ok(None);
    }
    Ok(Some((value, grads)))
}

/// `Aᵢ = Uᵢ·diag(e^{λᵢ})·Uᵢᵀ` with `Uᵢ` orthogonal.
#[derive(Debug, Clone)]
struct Frame {
    u: DMatrix<f64>,
    lam: DVector<f64>,
}

/// Log ratio at the frames, and per map the block of `H = G(GᵀG)⁻¹Gᵀ` on its
/// own rows, in its eigenbasis.
///
/// `Σ τᵢ MᵢᵀAᵢMᵢ = GᵀG` with one row `√τᵢ·e^{λ/2}·uᵀMᵢ` per eigenpair. A QR
/// of `G` with rows in decreasing size keeps log det accurate when the λ
/// spread is far beyond what a Cholesky of the assembled sum can resolve,
/// and `H = QQᵀ` has entries in `[−1, 1]`.
fn leverage(datum: &HblDatum, forms: &[DMatrix<f64>], frames: &[Frame]) -> Result<Option<ValueGradient>, NumericError> {
    let m = datum.dim();
    let mut rows: Vec<(f64, usize, usize, RowDVector<f64>)> = Vec::new();
    let mut log_num = 0.0;
    for (i, (f, form)) in frames.iter().zip(forms).enumerate() {
        if f.lam.len() != form.nrows() {
            return Err(NumericError::Shape {
                expected: format!("{0}x{0} matrix for map {i}", form.nrows()),
                found: f.lam.len().to_string(),
            });
        }
        let tau = to_f64(&datum.exponents()[i]);
        // log det exp(S) = tr S
        log_num += tau * f.lam.sum();
        if tau == 0.0 {
            continue;
        }
        for (j, lam) in f.lam.iter().enumerate() {
            let row = f.u.column(j).transpose() * form * (tau.sqrt() * (0.5 * lam).exp());
            rows.push((row.norm(), i, j, row));
        }
    }
    if rows.len() < m || rows.iter().any(|r| !r.0.is_finite()) {
        return Ok(None);
    }
    rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    let g = DMatrix::from_fn(rows.len(), m, |r, c| rows[r].3[c]);
    let qr = g.qr();
    let diag = qr.r().diagonal();
    if diag.iter().any(|x| *x == 0.0 || !x.is_finite()) {
        return Ok(None);
    }
    let log_den: f64 = diag.iter().map(|x| 2.0 * x.abs().ln()).sum();
    let q = qr.q();
    let mut position: Vec<Vec<usize>> = frames.iter().map(|f| vec![usize::MAX; f.lam.len()]).collect();
    for (p, r) in rows.iter().enumerate() {
        position[r.1][r.2] = p;
    }
    let blocks = position
        .iter()
        .map(|pos| {
            let r = pos.len();
            DMatrix::from_fn(r, r, |j, k| {
                if pos[j] == usize::MAX || pos[k] == usize::MAX {
                    0.0
                } else {
                    q.row(pos[j]).dot(&q.row(pos[k]))
                }
            })
        })
        .collect();
    Ok(Some((0.5 * (log_num - log_den), blocks)))
}

/// `2·sinh(d/2)/d`, continuous at 0.
fn sinhc(d: f64) -> f64 {
    if d.abs() < 1e-8 {
        1.0 + d * d / 24.0
    } else {
        2.0 * (0.5 * d).sinh() / d
    }
}

fn sym_exp(s: &DMatrix<f64>) -> DMatrix<f64> {
    let e = s.clone().symmetric_eigen();
    &e.eigenvectors * DMatrix::from_diagonal(&e.eigenvalues.map(f64::exp)) * e.eigenvectors.transpose()
}

fn random_symmetric(datum: &HblDatum, scale: f64, rng: &mut ChaCha8Rng) -> Vec<DMatrix<f64>> {
    let normal = Normal::new(0.0, scale).expect("positive scale");
    (0..datum.len())
        .map(|i| {
            let r = datum.rank(i);
            let x = DMatrix::from_fn(r, r, |_, _| normal.sample(rng));
            (&x + x.transpose()) * 0.5
        })
        .collect()
}

/// `K·exp(Δ)·Kᵀ` for `K = U·diag(e^{λ/2})`, returned again in eigen-form.
///
/// With `X = exp(Δ/2)`, the new eigenvectors are `U·W` where `W`
/// orthogonalizes the columns of `X·diag(e^{λ/2})`. One-sided Jacobi does
/// that with relative accuracy, since the matrix is a well-conditioned
/// factor times a diagonal.
fn step_frame(f: &Frame, delta: &DMatrix<f64>) -> Option<Frame> {
    let r = f.lam.len();
    let x = sym_exp(&(delta * 0.5));
    let mut c = x * DMatrix::from_diagonal(&f.lam.map(|l| (0.5 * l).exp()));
    let mut w = DMatrix::<f64>::identity(r, r);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..r {
            for q in p + 1..r {
                let alpha = c.column(p).norm_squared();
                let beta = c.column(q).norm_squared();
                let gamma = c.column(p).dot(&c.column(q));
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut c, &mut w] {
                    for k in 0..r {
                        let (a, b) = (mat[(k, p)], mat[(k, q)]);
                        mat[(k, p)] = cs * a - sn * b;
                        mat[(k, q)] = sn * a + cs * b;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let lam = DVector::from_iterator(r, (0..r).map(|k| 2.0 * c.column(k).norm().ln()));
    if lam.iter().any(|l| !l.is_finite()) {
        return None;
    }
    Some(Frame { u: &f.u * w, lam })
}

#[derive(Debug, Clone)]
pub struct AscentOptions {
    pub iterations: usize,
    /// Estimates above this count as divergence.
    pub threshold: f64,
    /// Standard deviation of the random symmetric starting point.
    pub init_scale: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            iterations: 2000,
            threshold: 1e6,
            init_scale: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentResult {
    pub sup_estimate: f64,
    pub diverged: bool,
    pub iterations: usize,
}

/// Gradient ascent on the log ratio in the affine-invariant geometry of
/// positive definite matrices.
///
/// Each step moves `Aᵢ` to `Kᵢ·exp(t·Gᵢ)·Kᵢᵀ` with `Aᵢ = KᵢKᵢᵀ`, where
/// `Gᵢ = ½τᵢ·I − ½·Hᵢ` is the gradient in that chart. The line search halves
/// `t` until the value improves, then doubles it while it keeps improving,
/// so linear growth along a divergent ray is found in a few steps.
/// Deterministic for a given seed.
pub fn gaussian_ascent(datum: &HblDatum, options: &AscentOptions, seed: u64) -> Result<AscentResult, NumericError> {
    let forms = surjective_forms(datum);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let taus: Vec<f64> = datum.exponents().iter().map(to_f64).collect();
    let mut frames: Vec<Frame> = random_symmetric(datum, options.init_scale, &mut rng)
        .into_iter()
        .map(|s| {
            let e = s.symmetric_eigen();
            Frame { u: e.eigenvectors, lam: e.eigenvalues }
        })
        .collect();
    let log_threshold = options.threshold.ln();
    let eval = |frames: &[Frame]| -> Result<Option<ValueGradient>, NumericError> {
        Ok(leverage(datum, &forms, frames)?.map(|(v, blocks)| {
            let grads = blocks
                .iter()
                .zip(&taus)
                .map(|(h, tau)| (DMatrix::identity(h.nrows(), h.ncols()) * *tau - h) * 0.5)
                .collect();
            (v, grads)
        }))
    };
    let advance = |frames: &[Frame], dirs: &[DMatrix<f64>], t: f64| -> Option<Vec<Frame>> {
        frames.iter().zip(dirs).map(|(f, d)| step_frame(f, &(d * t))).collect()
    };

    let Some((mut value, mut grad)) = eval(&frames)? else {
        return Ok(AscentResult {
            sup_estimate: f64::INFINITY,
            diverged: true,
            iterations: 0,
        });
    };
    let mut done = 0;
    for it in 0..options.iterations {
        done = it + 1;
        let norm2: f64 = grad.iter().map(|g| g.norm_squared()).sum();
        if value > log_threshold || norm2 < 1e-28 {
            break;
        }
        let try_step = |t: f64| -> Result<Option<Trial>, NumericError> {
            let Some(next) = advance(&frames, &grad, t) else { return Ok(None) };
            Ok(eval(&next)?.map(|(v, g)| (next, v, g)))
        };
        let mut step = 1.0;
        let mut accepted = None;
        // a numerically singular trial counts as overshooting
        while step > 1e-16 {
            match try_step(step)? {
                Some(found) if found.1 >= value => {
                    accepted = Some(found);
                    break;
                }
                _ => step *= 0.5,
            }
        }
        let Some(mut best) = accepted else { break };
        while best.1 <= log_threshold {
            match try_step(2.0 * step)? {
                Some(found) if found.1 > best.1 => {
                    best = found;
                    step *= 2.0;
                }
                _ => break,
            }
        }
        let improved = best.1 > value;
        (frames, value, grad) = best;
        if !improved {
            break;
        }
    }
    Ok(AscentResult {
        sup_estimate: value.exp(),
        diverged: value > log_threshold,
        iterations: done,
    })
}

/// Central finite difference of the log ratio along `direction` at `s`.
#[cfg(test)]
fn finite_difference(datum: &HblDatum, s: &[DMatrix<f64>], direction: &[DMatrix<f64>], h: f64) -> f64 {
    let shift = |sign: f64| -> f64 {
        let x: Vec<DMatrix<f64>> = s.iter().zip(direction).map(|(a, d)| a + d * (sign * h)).collect();
        log_gaussian_ratio(datum, &GaussianInput { matrices: x.iter().map(sym_exp).collect() }).unwrap()
    };
    (shift(1.0) - shift(-1.0)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::Matrix;
    use crate::rational::{int, ratio};

    #[test]
    fn loomis_whitney_identity_is_one() {
        let d = fixtures::loomis_whitney_datum(2, vec![ratio(1, 2); 3]);
        let r = gaussian_ratio(&d, &GaussianInput::identity(&d)).unwrap();
        assert!((r - 1.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn singular_sum_is_infinite() {
        let d = HblDatum::from_matrices(2, vec![Matrix::from_i64(2, &[&[1, 0]])], vec![int(1)]).unwrap();
        assert_eq!(gaussian_ratio(&d, &GaussianInput::identity(&d)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn rejects_indefinite() {
        let d = fixtures::loomis_whitney_datum(2, vec![ratio(1, 2); 3]);
        let mut g = GaussianInput::identity(&d);
        g.matrices[1][(0, 0)] = -1.0;
        assert_eq!(gaussian_ratio(&d, &g), Err(NumericError::NotPositiveDefinite { map: 1 }));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d = fixtures::r6_datum();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let s = random_symmetric(&d, 0.4, &mut rng);
            let dir = random_symmetric(&d, 1.0, &mut rng);
            let (_, g) = log_ratio_gradient(&d, &s).unwrap().unwrap();
            let analytic: f64 = g.iter().zip(&dir).map(|(a, b)| a.dot(b)).sum();
            let numeric = finite_difference(&d, &s, &dir, 1e-5);
            let rel = (analytic - numeric).abs() / numeric.abs().max(1e-3);
            assert!(rel < 1e-5, "{analytic} vs {numeric}");
        }
    }

    #[test]
    fn ascent_diverges_on_violation() {
        let d = fixtures::loomis_whitney_datum(2, vec![ratio(3, 4), ratio(3, 4), int(0)]);
        let r = gaussian_ascent(&d, &AscentOptions::default(), 0).unwrap();
        assert!(r.diverged, "{r:?}");
    }

    #[test]
    fn ascent_bounded_on_loomis_whitney() {
        let d = fixtures::loomis_whitney_datum(2, vec![ratio(1, 2); 3]);
        let r = gaussian_ascent(&d, &AscentOptions::default(), 0).unwrap();
        assert!(!r.diverged);
        assert!((r.sup_estimate - 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn ascent_reaches_the_r6_constant() {
        let r = gaussian_ascent(&fixtures::r6_datum(), &AscentOptions::default(), 3).unwrap();
        assert!(!r.diverged);
        assert!((r.sup_estimate - 0.5f64.sqrt()).abs() < 1e-8, "{}", r.sup_estimate);
    }

    #[test]
    fn ascent_diverges_without_scaling() {
        let d = fixtures::loomis_whitney_datum(2, vec![int(1); 3]);
        assert!(gaussian_ascent(&d, &AscentOptions::default(), 1).unwrap().diverged);
    }
}
