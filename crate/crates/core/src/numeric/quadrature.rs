use num_traits::{One, Zero};

use super::{GridFunction, NumericError};
use crate::datum::HblDatum;
use crate::rational::to_f64;

/// Midpoint-rule grid on a box in `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxGrid {
    pub resolution: Vec<usize>,
    pub bounds: Vec<(f64, f64)>,
}

impl BoxGrid {
    /// Aligns each axis of `H` with the grid of the first map that reads it.
    ///
    /// Requires every map to be a selection of distinct coordinates, so that
    /// `πᵢ` sends cell midpoints of `H` to cell midpoints of `fᵢ`.
    pub fn from_coordinate_maps(datum: &HblDatum, fs: &[GridFunction]) -> Result<Self, NumericError> {
        let m = datum.dim();
        let mut axes: Vec<Option<(usize, (f64, f64))>> = vec![None; m];
        for (i, f) in fs.iter().enumerate() {
            let map = datum.map(i);
            for r in 0..map.rows() {
                let row = map.row(r);
                let ones: Vec<usize> = (0..m).filter(|&j| row[j].is_one()).collect();
                let nonzero = row.iter().filter(|x| !x.is_zero()).count();
                if ones.len() != 1 || nonzero != 1 {
                    return Err(NumericError::Shape {
                        expected: "coordinate-selection maps (or an explicit grid)".into(),
                        found: format!("row {} of map {}", r + 1, i + 1),
                    });
                }
                let axis = ones[0];
                let spec = (f.resolution[r], f.bounds[r]);
                match axes[axis] {
                    None => axes[axis] = Some(spec),
                    Some(s) if s == spec => {}
                    Some(_) => {
                        return Err(NumericError::Shape {
                            expected: format!("consistent grids along axis {}", axis + 1),
                            found: format!("map {} disagrees", i + 1),
                        })
                    }
                }
            }
        }
        let mut resolution = Vec::with_capacity(m);
        let mut bounds = Vec::with_capacity(m);
        for (axis, a) in axes.into_iter().enumerate() {
            let (r, b) = a.ok_or(NumericError::UnboundedSupport { axis })?;
            resolution.push(r);
            bounds.push(b);
        }
        Ok(BoxGrid { resolution, bounds })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs/rhs`, reported as 0 when both vanish.
    pub ratio: f64,
}

/// Tensor midpoint quadrature of both sides of the inequality with constant `c`.
///
/// `grid` defaults to [`BoxGrid::from_coordinate_maps`].
pub fn quadrature_check(datum: &HblDatum, c: f64, fs: &[GridFunction], grid: Option<&BoxGrid>) -> Result<QuadratureResult, NumericError> {
    let m = datum.dim();
    if m > 3 {
        return Err(NumericError::DimensionTooLarge(m));
    }
    if fs.len() != datum.len() {
        return Err(NumericError::Shape {
            expected: format!("{} grid functions", datum.len()),
            found: fs.len().to_string(),
        });
    }
    for (i, f) in fs.iter().enumerate() {
        if f.dims() != datum.map(i).rows() {
            return Err(NumericError::Shape {
                expected: format!("grid of dimension {} for map {}", datum.map(i).rows(), i + 1),
                found: f.dims().to_string(),
            });
        }
    }
    let derived;
    let grid = match grid {
        Some(g) => g,
        None => {
            derived = BoxGrid::from_coordinate_maps(datum, fs)?;
            &derived
        }
    };
    if grid.resolution.len() != m || grid.bounds.len() != m {
        return Err(NumericError::Shape {
            expected: format!("grid on R^{m}"),
            found: format!("{} axes", grid.resolution.len()),
        });
    }
    let maps: Vec<Vec<Vec<f64>>> = (0..datum.len())
        .map(|i| (0..datum.map(i).rows()).map(|r| datum.map(i).row(r).iter().map(to_f64).collect()).collect())
        .collect();
    let tau: Vec<f64> = datum.exponents().iter().map(to_f64).collect();
    let widths: Vec<f64> = (0..m)
        .map(|a| (grid.bounds[a].1 - grid.bounds[a].0) / grid.resolution[a] as f64)
        .collect();
    let cell: f64 = widths.iter().product();
    let total: usize = grid.resolution.iter().product();

    let mut lhs = 0.0;
    let mut x = vec![0.0; m];
    let mut y = Vec::new();
    for k in 0..total {
        let mut rest = k;
        for a in (0..m).rev() {
            let i = rest % grid.resolution[a];
            rest /= grid.resolution[a];
            x[a] = grid.bounds[a].0 + (i as f64 + 0.5) * widths[a];
        }
        let mut prod = 1.0;
        for (i, f) in fs.iter().enumerate() {
            y.clear();
            y.extend(maps[i].iter().map(|row| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>()));
            prod *= f.eval(&y).powf(tau[i]);
            if prod == 0.0 {
                break;
            }
        }
        lhs += prod;
    }
    lhs *= cell;
    let rhs = c * fs.iter().zip(&tau).map(|(f, t)| f.mass().powf(*t)).product::<f64>();
    let ratio = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(QuadratureResult { lhs, rhs, ratio })
}
