//! Jacobi fields and the index form in a parallel orthonormal frame.

use crate::manifold::{GeodesicPath, Manifold, Point, TangentVector};
use crate::prelude::*;
use crate::{GeoError, Result};

/// A geodesic sampled on a uniform grid with a parallel orthonormal frame
/// and the curvature operator `K_ij = ⟨R(E_j, β̇)β̇, E_i⟩` at each node.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFrame {
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    pub velocities: Vec<DVector<f64>>,
    /// Columns are the frame vectors in coordinates.
    pub frames: Vec<DMatrix<f64>>,
    pub curvature: Vec<DMatrix<f64>>,
}

impl PathFrame {
    /// `intervals` is rounded up to an even number (Simpson).
    pub fn new(m: &Manifold, path: &GeodesicPath, intervals: usize) -> Result<Self> {
        let k = intervals.max(4) + intervals.max(4) % 2;
        let n = m.dim();
        let times: Vec<f64> = (0..=k).map(|i| path.t_end * i as f64 / k as f64).collect();
        let e0 = m.orthonormal_frame(&path.start, Some(&path.initial_velocity));
        let cols: Vec<DVector<f64>> = (0..n).map(|i| e0.column(i).into_owned()).collect();
        let raw = m.transport_along(&path.start, &path.initial_velocity, &cols, &times)?;
        let mut out = Self {
            times: times.clone(),
            points: Vec::with_capacity(k + 1),
            velocities: Vec::with_capacity(k + 1),
            frames: Vec::with_capacity(k + 1),
            curvature: Vec::with_capacity(k + 1),
        };
        for (sample, vecs) in raw {
            let e = DMatrix::from_columns(&vecs);
            let r = m.riemann(&sample.point);
            let g = m.metric(&sample.point);
            let mut kmat = DMatrix::zeros(n, n);
            for j in 0..n {
                let rj = Manifold::apply_riemann(&r, &vecs[j], &sample.velocity, &sample.velocity);
                let grj = &g * rj;
                for i in 0..n {
                    kmat[(i, j)] = vecs[i].dot(&grj);
                }
            }
            out.points.push(sample.point);
            out.velocities.push(sample.velocity);
            out.frames.push(e);
            out.curvature.push(kmat);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.times[self.len() - 1] - self.times[0]) / (self.len() - 1) as f64
    }

    /// Frame components of a vector at node `i`.
    pub fn components(&self, m: &Manifold, i: usize, v: &DVector<f64>) -> DVector<f64> {
        let g = m.metric(&self.points[i]);
        self.frames[i].transpose() * (g * v)
    }

    /// Coordinates of frame components at node `i`.
    pub fn vector(&self, i: usize, a: &DVector<f64>) -> TangentVector {
        TangentVector::new(self.points[i].clone(), &self.frames[i] * a)
    }

    /// `K` at the midpoint between nodes `i` and `i + 1` (cubic interpolation).
    fn curvature_mid(&self, i: usize) -> DMatrix<f64> {
        let k = &self.curvature;
        let last = k.len() - 1;
        if i == 0 {
            (&k[0] * 3.0 + &k[1] * 6.0 - &k[2]) / 8.0
        } else if i + 1 == last {
            (&k[last] * 3.0 + &k[last - 1] * 6.0 - &k[last - 2]) / 8.0
        } else {
            (&k[i] * 9.0 + &k[i + 1] * 9.0 - &k[i - 1] - &k[i + 2]) / 16.0
        }
    }
}

/// A vector field along a [`PathFrame`], in frame components.
#[derive(Debug, Clone, PartialEq)]
pub struct PathField {
    pub components: Vec<DVector<f64>>,
    /// Covariant derivative components, when known exactly.
    pub derivatives: Option<Vec<DVector<f64>>>,
}

impl PathField {
    /// A parallel field with constant frame components `a`.
    pub fn parallel(frame: &PathFrame, a: DVector<f64>) -> Self {
        let zero = DVector::zeros(a.len());
        Self { components: vec![a; frame.len()], derivatives: Some(vec![zero; frame.len()]) }
    }

    /// Field given by a function of time returning frame components.
    pub fn from_fn(frame: &PathFrame, f: impl Fn(f64) -> DVector<f64>) -> Self {
        Self { components: frame.times.iter().map(|&t| f(t)).collect(), derivatives: None }
    }

    fn derivatives_on(&self, h: f64) -> Vec<DVector<f64>> {
        if let Some(d) = &self.derivatives {
            return d.clone();
        }
        fourth_order_derivative(&self.components, h)
    }
}

fn fourth_order_derivative(a: &[DVector<f64>], h: f64) -> Vec<DVector<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            if n < 5 {
                let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
                return (&a[r] - &a[l]) / (h * (r - l) as f64);
            }
            if i >= 2 && i + 2 < n {
                (&a[i - 2] - &a[i - 1] * 8.0 + &a[i + 1] * 8.0 - &a[i + 2]) / (12.0 * h)
            } else if i == 0 {
                (&a[0] * -25.0 + &a[1] * 48.0 - &a[2] * 36.0 + &a[3] * 16.0 - &a[4] * 3.0) / (12.0 * h)
            } else if i == 1 {
                (&a[0] * -3.0 - &a[1] * 10.0 + &a[2] * 18.0 - &a[3] * 6.0 + &a[4]) / (12.0 * h)
            } else if i == n - 1 {
                (&a[n - 1] * 25.0 - &a[n - 2] * 48.0 + &a[n - 3] * 36.0 - &a[n - 4] * 16.0 + &a[n - 5] * 3.0)
                    / (12.0 * h)
            } else {
                (&a[n - 1] * 3.0 + &a[n - 2] * 10.0 - &a[n - 3] * 18.0 + &a[n - 4] * 6.0 - &a[n - 5]) / (12.0 * h)
            }
        })
        .collect()
}

/// Jacobi field with prescribed endpoint values.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationData {
    pub frame: PathFrame,
    pub field: PathField,
    /// Largest `‖V″ + R(V, β̇)β̇‖` over interior nodes (fourth-order differences).
    pub residual: f64,
    pub is_jacobi: bool,
}

impl VariationData {
    /// Field vectors in coordinates at every node.
    pub fn vectors(&self) -> Vec<TangentVector> {
        (0..self.frame.len()).map(|i| self.frame.vector(i, &self.field.components[i])).collect()
    }

    /// Length and energy of the varied curves `t ↦ exp_{β(t)}(s V(t))`,
    /// by polygonal sums in the chart of each node.
    pub fn variation_curves(&self, m: &Manifold, s_values: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
        let h = self.frame.step();
        let mut out = Vec::new();
        for &s in s_values {
            let pts: Vec<Point> = self
                .vectors()
                .into_iter()
                .map(|v| m.exp(&v.scaled(s)))
                .collect::<Result<_>>()?;
            let (mut len, mut energy) = (0.0, 0.0);
            for w in pts.windows(2) {
                let b = m.to_chart(&w[1], w[0].chart)?;
                let mid = Point { chart: w[0].chart, coords: (&w[0].coords + &b.coords) * 0.5 };
                let dx = &b.coords - &w[0].coords;
                let q = m.inner(&mid, &dx, &dx);
                len += q.sqrt();
                energy += q / h;
            }
            out.push((s, len, energy));
        }
        Ok(out)
    }
}

/// Solves `V″ + R(V, β̇)β̇ = 0` with `V(0) = v0`, `V(T) = v1` by shooting on `V′(0)`.
///
/// `v0`, `v1` are coordinate components at the path's start and end.
pub fn jacobi_field(
    m: &Manifold,
    path: &GeodesicPath,
    v0: &DVector<f64>,
    v1: &DVector<f64>,
    intervals: usize,
) -> Result<VariationData> {
    let frame = PathFrame::new(m, path, intervals)?;
    let n = m.dim();
    let last = frame.len() - 1;
    let a0 = frame.components(m, 0, v0);
    let a1 = frame.components(m, last, v1);
    // Fundamental matrices: columns 0..n start at (0, I), columns n..2n at (I, 0).
    let mut x = DMatrix::zeros(n, 2 * n);
    let mut dx = DMatrix::zeros(n, 2 * n);
    for i in 0..n {
        dx[(i, i)] = 1.0;
        x[(i, n + i)] = 1.0;
    }
    let h = frame.step();
    let mut xs = vec![x.clone()];
    let mut dxs = vec![dx.clone()];
    for i in 0..last {
        let (k0, km, k1) = (&frame.curvature[i], frame.curvature_mid(i), &frame.curvature[i + 1]);
        let f1x = dx.clone();
        let f1v = -(k0 * &x);
        let x2 = &x + &f1x * (0.5 * h);
        let v2 = &dx + &f1v * (0.5 * h);
        let f2v = -(&km * &x2);
        let x3 = &x + &v2 * (0.5 * h);
        let v3 = &dx + &f2v * (0.5 * h);
        let f3v = -(&km * &x3);
        let x4 = &x + &v3 * h;
        let v4 = &dx + &f3v * h;
        let f4v = -(k1 * &x4);
        x += (&f1x + &v2 * 2.0 + &v3 * 2.0 + &v4) * (h / 6.0);
        dx += (&f1v + &f2v * 2.0 + &f3v * 2.0 + &f4v) * (h / 6.0);
        if !x.iter().all(|c| c.is_finite()) {
            return Err(GeoError::NonFiniteState);
        }
        xs.push(x.clone());
        dxs.push(dx.clone());
    }
    let y_end = xs[last].columns(0, n).into_owned();
    let z_end = xs[last].columns(n, n).into_owned();
    let sv = y_end.clone().svd(false, false).singular_values;
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smin < 1e-6 * path.t_end.abs().max(1.0) {
        return Err(GeoError::ConjugatePoint);
    }
    let c = y_end.lu().solve(&(&a1 - &z_end * &a0)).ok_or(GeoError::ConjugatePoint)?;
    let mut coef = DVector::zeros(2 * n);
    coef.rows_mut(0, n).copy_from(&c);
    coef.rows_mut(n, n).copy_from(&a0);
    let comps: Vec<DVector<f64>> = xs.iter().map(|x| x * &coef).collect();
    let derivs: Vec<DVector<f64>> = dxs.iter().map(|d| d * &coef).collect();
    let second = fourth_order_derivative(&derivs, h);
    let mut residual: f64 = 0.0;
    for i in 2..last.saturating_sub(1) {
        let r = &second[i] + &frame.curvature[i] * &comps[i];
        residual = residual.max(r.norm());
    }
    Ok(VariationData {
        frame,
        field: PathField { components: comps, derivatives: Some(derivs) },
        residual,
        is_jacobi: true,
    })
}

/// `I(V, W) = ∫ ⟨V′, W′⟩ − ⟨R(V, β̇)β̇, W⟩ dt` by Simpson's rule.
pub fn index_form(frame: &PathFrame, v: &PathField, w: &PathField) -> Result<f64> {
    let n = frame.len();
    if v.components.len() != n || w.components.len() != n {
        return Err(GeoError::GridMismatch);
    }
    let h = frame.step();
    let dv = v.derivatives_on(h);
    let dw = w.derivatives_on(h);
    if dv.len() != n || dw.len() != n {
        return Err(GeoError::GridMismatch);
    }
    let integrand: Vec<f64> = (0..n)
        .map(|i| dv[i].dot(&dw[i]) - w.components[i].dot(&(&frame.curvature[i] * &v.components[i])))
        .collect();
    Ok(crate::manifold::simpson(&integrand, h))
}
