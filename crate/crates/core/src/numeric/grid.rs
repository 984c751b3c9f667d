use std::fmt::Write as _;

use num_traits::Zero;

use super::NumericError;
use crate::flow::{is_balanced, total_mass, GraphDecomposition, WeightFunction};
use crate::linalg::Subspace;
use crate::rational::to_f64;

/// Step function on a box in `ℝ^dims`, one value per cell, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub resolution: Vec<usize>,
    pub bounds: Vec<(f64, f64)>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(resolution: Vec<usize>, bounds: Vec<(f64, f64)>, values: Vec<f64>) -> Result<Self, NumericError> {
        let shape_err = |reason: String| NumericError::GridParse { line: 0, reason };
        if resolution.len() != bounds.len() || resolution.is_empty() || resolution.len() > 3 {
            return Err(shape_err(format!(
                "{} resolutions and {} bounds for a grid of dimension 1..3",
                resolution.len(),
                bounds.len()
            )));
        }
        if resolution.contains(&0) {
            return Err(shape_err("zero resolution".into()));
        }
        if bounds.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
            return Err(shape_err("bounds must be finite with lo < hi".into()));
        }
        let cells: usize = resolution.iter().product();
        if values.len() != cells {
            return Err(shape_err(format!("expected {cells} values, found {}", values.len())));
        }
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(shape_err(format!("value {k} is negative or not finite")));
        }
        Ok(GridFunction {
            resolution,
            bounds,
            values,
        })
    }

    /// `value` on every cell.
    pub fn constant(resolution: Vec<usize>, bounds: Vec<(f64, f64)>, value: f64) -> Self {
        let n = resolution.iter().product();
        GridFunction::new(resolution, bounds, vec![value; n]).expect("valid constant grid")
    }

    pub fn dims(&self) -> usize {
        self.resolution.len()
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        (hi - lo) / self.resolution[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|a| self.cell_width(a)).product()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims()];
        for a in (0..self.dims().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.resolution[a + 1];
        }
        s
    }

    /// Multi-index of a flat cell index.
    pub fn unflatten(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        for a in (0..self.dims()).rev() {
            idx[a] = k % self.resolution[a];
            k /= self.resolution[a];
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    /// Value of the cell containing `x`; zero outside the box. Points on an
    /// interior cell boundary belong to the upper cell.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut k = 0;
        for (a, (&xa, s)) in x.iter().zip(self.strides()).enumerate() {
            let (lo, hi) = self.bounds[a];
            if !(xa >= lo && xa < hi) {
                return 0.0;
            }
            let i = (((xa - lo) / self.cell_width(a)).floor() as usize).min(self.resolution[a] - 1);
            k += i * s;
        }
        self.values[k]
    }

    /// Integrates out the listed axes, times their cell widths; the result
    /// keeps the full grid shape and is constant along those axes.
    pub fn integrate_axes(&self, axes: &[usize]) -> GridFunction {
        if axes.is_empty() {
            return self.clone();
        }
        let strides = self.strides();
        let width: f64 = axes.iter().map(|&a| self.cell_width(a)).product();
        let mut out = vec![0.0; self.values.len()];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut idx = self.unflatten(k);
            if axes.iter().any(|&a| idx[a] != 0) {
                continue;
            }
            let mut sum = 0.0;
            let mut counter = vec![0usize; axes.len()];
            loop {
                for (c, &a) in counter.iter().zip(axes) {
                    idx[a] = *c;
                }
                sum += self.values[idx.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>()];
                let mut pos = 0;
                while pos < axes.len() {
                    counter[pos] += 1;
                    if counter[pos] < self.resolution[axes[pos]] {
                        break;
                    }
                    counter[pos] = 0;
                    pos += 1;
                }
                if pos == axes.len() {
                    break;
                }
            }
            *slot = sum * width;
        }
        // copy each fibre's value to every cell in the fibre
        for k in 0..out.len() {
            let mut idx = self.unflatten(k);
            if axes.iter().all(|&a| idx[a] == 0) {
                continue;
            }
            for &a in axes {
                idx[a] = 0;
            }
            out[k] = out[idx.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>()];
        }
        GridFunction {
            resolution: self.resolution.clone(),
            bounds: self.bounds.clone(),
            values: out,
        }
    }

    /// Header `dims r₁ … r_dims lo₁ hi₁ … lo_dims hi_dims`, then one line of values per last-axis row.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}", self.dims());
        for r in &self.resolution {
            write!(out, " {r}").unwrap();
        }
        for (lo, hi) in &self.bounds {
            write!(out, " {lo} {hi}").unwrap();
        }
        out.push('\n');
        let row = *self.resolution.last().expect("dims >= 1");
        for chunk in self.values.chunks(row) {
            let line: Vec<String> = chunk.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, NumericError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hline, header) = lines.next().ok_or(NumericError::GridParse {
            line: 1,
            reason: "missing header".into(),
        })?;
        let err = |line: usize, reason: String| NumericError::GridParse { line: line + 1, reason };
        let fields: Vec<&str> = header.split_whitespace().collect();
        let dims: usize = fields
            .first()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| err(hline, "header must start with the dimension".into()))?;
        if !(1..=3).contains(&dims) || fields.len() != 1 + 3 * dims {
            return Err(err(
                hline,
                format!("header needs dims (1..3), {dims} resolutions and {} bounds", 2 * dims),
            ));
        }
        let resolution = fields[1..=dims]
            .iter()
            .map(|f| f.parse::<usize>().map_err(|_| err(hline, format!("bad resolution '{f}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        let nums = fields[1 + dims..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| err(hline, format!("bad bound '{f}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        let bounds = nums.chunks(2).map(|c| (c[0], c[1])).collect();
        let mut values = Vec::new();
        for (ln, line) in lines {
            for tok in line.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|_| err(ln, format!("bad value '{tok}'")))?);
            }
        }
        GridFunction::new(resolution, bounds, values).map_err(|e| match e {
            NumericError::GridParse { reason, .. } => err(hline, reason),
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizeReport {
    /// `f_e = f_{V₁}/f_{V₂}` per edge, zero where `f_{V₂}` vanishes.
    pub edge_functions: Vec<GridFunction>,
    /// Axis added by each edge.
    pub edge_axes: Vec<usize>,
    /// Largest `|f^τ − ‖f‖₁^τ ∏ f_e^{φ(e)}| / f^τ` over cells with `f > 0`.
    pub max_relative_error: f64,
    pub max_line_sum: f64,
    /// Largest change of any `f_e` along an axis of its source vertex.
    pub max_translation_defect: f64,
    pub total_mass: f64,
    pub tau: f64,
}

/// Realizes the factorization of `f^τ` along a graph of coordinate subspaces.
pub fn grid_factorize(f: &GridFunction, g: &GraphDecomposition, phi: &WeightFunction) -> Result<FactorizeReport, NumericError> {
    if g.ambient != f.dims() {
        return Err(NumericError::Shape {
            expected: format!("graph on R^{}", f.dims()),
            found: format!("R^{}", g.ambient),
        });
    }
    if phi.width() != 1 || phi.len() != g.edges.len() {
        return Err(NumericError::Weight(format!(
            "need width 1 and {} edges, got width {} and {} edges",
            g.edges.len(),
            phi.width(),
            phi.len()
        )));
    }
    if let Some(v) = g.validate().first() {
        return Err(NumericError::Weight(v.to_string()));
    }
    if phi.first_negative().is_some() || !is_balanced(g, phi).map_err(|e| NumericError::Weight(e.to_string()))? {
        return Err(NumericError::Weight("weight must be nonnegative and balanced".into()));
    }
    let tau = to_f64(&total_mass(g, phi).map_err(|e| NumericError::Weight(e.to_string()))?[0]);

    let mut axes = Vec::with_capacity(g.vertices.len());
    for (k, v) in g.vertices.iter().enumerate() {
        if *v != Subspace::coordinate(g.ambient, v.pivots()) {
            return Err(NumericError::NonCoordinate { vertex: k });
        }
        axes.push(v.pivots().to_vec());
    }
    let marginals: Vec<GridFunction> = axes.iter().map(|a| f.integrate_axes(a)).collect();

    let mut edge_functions = Vec::new();
    let mut edge_axes = Vec::new();
    let mut max_line_sum: f64 = 0.0;
    let mut max_translation_defect: f64 = 0.0;
    for &(a, b) in &g.edges {
        let new_axis = *axes[b].iter().find(|x| !axes[a].contains(x)).expect("edge adds an axis");
        let (low, high) = (&marginals[a], &marginals[b]);
        let values = low
            .values
            .iter()
            .zip(&high.values)
            .map(|(l, h)| if *h > 0.0 { l / h } else { 0.0 })
            .collect();
        let fe = GridFunction {
            resolution: f.resolution.clone(),
            bounds: f.bounds.clone(),
            values,
        };
        for k in 0..fe.values.len() {
            let idx = fe.unflatten(k);
            for &ax in &axes[a] {
                let mut base = idx.clone();
                base[ax] = 0;
                let d = (fe.values[k] - fe.values[fe.flatten(&base)]).abs();
                max_translation_defect = max_translation_defect.max(d);
            }
        }
        let line = fe.integrate_axes(&[new_axis]);
        max_line_sum = line.values.iter().fold(max_line_sum, |m, &x| m.max(x));
        edge_functions.push(fe);
        edge_axes.push(new_axis);
    }

    let norm = f.mass();
    let weights: Vec<f64> = phi.values().iter().map(|r| to_f64(&r[0])).collect();
    let mut max_relative_error: f64 = 0.0;
    for (k, &fx) in f.values.iter().enumerate() {
        if fx <= 0.0 {
            continue;
        }
        let lhs = fx.powf(tau);
        let mut rhs = norm.powf(tau);
        for (fe, (w, raw)) in edge_functions.iter().zip(weights.iter().zip(phi.values())) {
            if !raw[0].is_zero() {
                rhs *= fe.values[k].powf(*w);
            }
        }
        max_relative_error = max_relative_error.max((lhs - rhs).abs() / lhs);
    }
    Ok(FactorizeReport {
        edge_functions,
        edge_axes,
        max_relative_error,
        max_line_sum,
        max_translation_defect,
        total_mass: norm,
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::int;

    fn unit_cube(n: usize, value: f64) -> GridFunction {
        GridFunction::constant(vec![n; 3], vec![(0.0, 1.0); 3], value)
    }

    #[test]
    fn constant_function_has_unit_line_sums() {
        let g = fixtures::coordinate_chain(3);
        let phi = WeightFunction::scalar(vec![int(1); 3]);
        let r = grid_factorize(&unit_cube(4, 2.5), &g, &phi).unwrap();
        assert!((r.max_line_sum - 1.0).abs() < 1e-12);
        assert!(r.max_relative_error < 1e-12);
        assert_eq!(r.max_translation_defect, 0.0);
        for fe in &r.edge_functions {
            let first = fe.values[0];
            assert!(fe.values.iter().all(|v| (v - first).abs() < 1e-15));
        }
    }

    #[test]
    fn half_support() {
        let g = fixtures::coordinate_chain(3);
        let phi = WeightFunction::scalar(vec![int(1); 3]);
        let mut f = unit_cube(4, 0.0);
        for k in 0..f.values.len() {
            if f.unflatten(k)[0] < 2 {
                f.values[k] = 1.0 + k as f64 / 10.0;
            }
        }
        let r = grid_factorize(&f, &g, &phi).unwrap();
        assert!(r.max_relative_error < 1e-12);
        assert!(r.max_line_sum <= 1.0 + 1e-12);
    }

    #[test]
    fn rejects_rotated_vertices() {
        let mut g = fixtures::coordinate_chain(3);
        g.vertices[1] = Subspace::from_vectors(3, vec![vec![int(1), int(1), int(0)]]).unwrap();
        let phi = WeightFunction::scalar(vec![int(1); 3]);
        assert!(matches!(
            grid_factorize(&unit_cube(2, 1.0), &g, &phi),
            Err(NumericError::NonCoordinate { vertex: 1 })
        ));
    }

    #[test]
    fn text_round_trip() {
        let f = GridFunction::new(vec![2, 3], vec![(0.0, 1.0), (-1.0, 2.0)], vec![0.0, 1.0, 2.0, 3.5, 4.0, 0.25]).unwrap();
        let back = GridFunction::parse(&f.to_text()).unwrap();
        assert_eq!(back, f);
        assert_eq!(f.eval(&[0.75, 1.5]), 0.25);
        assert_eq!(f.eval(&[1.5, 0.0]), 0.0);
        assert!(matches!(
            GridFunction::parse("2 2 2 0 1 0 1\n1 2 3\n"),
            Err(NumericError::GridParse { line: 1, .. })
        ));
        assert!(matches!(
            GridFunction::parse("1 2 0 1\n1 x\n"),
            Err(NumericError::GridParse { line: 2, .. })
        ));
    }

    #[test]
    fn axis_integration() {
        let f = GridFunction::new(vec![2, 2], vec![(0.0, 1.0), (0.0, 1.0)], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = f.integrate_axes(&[0]);
        assert_eq!(g.values, vec![2.0, 3.0, 2.0, 3.0]);
        let h = f.integrate_axes(&[0, 1]);
        assert_eq!(h.values, vec![2.5; 4]);
        assert!((f.mass() - 2.5).abs() < 1e-15);
    }
}
