//! Built-in model manifolds.

use super::{ChartId, Geometry, Point};
use crate::prelude::*;

/// Flat `R^n` in Cartesian coordinates.
#[derive(Debug, Clone)]
pub struct Euclidean {
    dim: usize,
    pub half_width: f64,
}

impl Euclidean {
    pub fn new(dim: usize) -> Self {
        Self { dim, half_width: 1e6 }
    }
}

impl Geometry for Euclidean {
    fn name(&self) -> &str {
        "euclidean"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn in_domain(&self, _chart: ChartId, x: &[f64]) -> bool {
        x.iter().all(|c| c.abs() <= self.half_width)
    }
    fn metric(&self, _chart: ChartId, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }
    fn christoffel(&self, _chart: ChartId, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn embed(&self, _chart: ChartId, x: &[f64]) -> Option<DVector<f64>> {
        Some(DVector::from_column_slice(x))
    }
    fn from_embedding(&self, y: &[f64]) -> Option<Point> {
        (y.len() == self.dim).then(|| Point::new(0, y))
    }
    fn injectivity_radius(&self) -> f64 {
        f64::INFINITY
    }
}

/// Christoffel symbols of a conformal metric `e^{2ψ} δ_ij` given `∂ψ`.
fn conformal_christoffel(dpsi: &[f64], out: &mut [f64]) {
    let n = dpsi.len();
    out.fill(0.0);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                if k == i {
                    v += dpsi[j];
                }
                if k == j {
                    v += dpsi[i];
                }
                if i == j {
                    v -= dpsi[k];
                }
                out[k * n * n + i * n + j] = v;
            }
        }
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum()
}

/// Unit sphere `S^n ⊂ R^{n+1}` with two stereographic charts.
///
/// Chart 0 projects from the south pole (the north pole sits at the origin),
/// chart 1 from the north pole. Both charts are restricted to `|u| ≤ radius`.
#[derive(Debug, Clone)]
pub struct Sphere {
    dim: usize,
    pub chart_radius: f64,
}

impl Sphere {
    pub fn new(dim: usize) -> Self {
        Self { dim, chart_radius: 3.0 }
    }
}

impl Geometry for Sphere {
    fn name(&self) -> &str {
        "sphere"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn chart_count(&self) -> usize {
        2
    }
    fn in_domain(&self, chart: ChartId, x: &[f64]) -> bool {
        chart < 2 && norm_sq(x) <= self.chart_radius * self.chart_radius
    }
    fn metric(&self, _chart: ChartId, x: &[f64]) -> DMatrix<f64> {
        let lam = 2.0 / (1.0 + norm_sq(x));
        DMatrix::identity(self.dim, self.dim) * (lam * lam)
    }
    fn christoffel(&self, _chart: ChartId, x: &[f64], out: &mut [f64]) {
        let denom = 1.0 + norm_sq(x);
        let mut dpsi = [0.0; 8];
        let n = x.len();
        for i in 0..n {
            dpsi[i] = -2.0 * x[i] / denom;
        }
        conformal_christoffel(&dpsi[..n], out);
    }
    fn embed(&self, chart: ChartId, x: &[f64]) -> Option<DVector<f64>> {
        let r2 = norm_sq(x);
        let mut y = DVector::zeros(self.dim + 1);
        for i in 0..self.dim {
            y[i] = 2.0 * x[i] / (1.0 + r2);
        }
        let last = (1.0 - r2) / (1.0 + r2);
        y[self.dim] = if chart == 0 { last } else { -last };
        Some(y)
    }
    fn from_embedding(&self, y: &[f64]) -> Option<Point> {
        if y.len() != self.dim + 1 {
            return None;
        }
        let nrm = norm_sq(y).sqrt();
        if nrm == 0.0 {
            return None;
        }
        let z = y[self.dim] / nrm;
        let (chart, denom) = if z >= -0.5 { (0, 1.0 + z) } else { (1, 1.0 - z) };
        let coords: Vec<f64> = y[..self.dim].iter().map(|c| c / nrm / denom).collect();
        Some(Point::new(chart, &coords))
    }
    fn transition(&self, from: ChartId, to: ChartId, x: &[f64]) -> Option<DVector<f64>> {
        if from == to {
            return Some(DVector::from_column_slice(x));
        }
        let r2 = norm_sq(x);
        (r2 > 0.0).then(|| DVector::from_iterator(x.len(), x.iter().map(|c| c / r2)))
    }
    fn transition_jacobian(&self, from: ChartId, to: ChartId, x: &[f64]) -> Option<DMatrix<f64>> {
        let n = x.len();
        if from == to {
            return Some(DMatrix::identity(n, n));
        }
        let r2 = norm_sq(x);
        if r2 == 0.0 {
            return None;
        }
        let u = DVector::from_column_slice(x);
        Some((DMatrix::identity(n, n) * r2 - &u * u.transpose() * 2.0) / (r2 * r2))
    }
    fn preferred_chart(&self, chart: ChartId, x: &[f64]) -> ChartId {
        if norm_sq(x) > 4.0 {
            1 - chart
        } else {
            chart
        }
    }
    fn injectivity_radius(&self) -> f64 {
        core::f64::consts::PI
    }
}

/// Poincaré ball model of hyperbolic space, curvature −1.
#[derive(Debug, Clone)]
pub struct Hyperbolic {
    dim: usize,
    pub chart_radius: f64,
}

impl Hyperbolic {
    pub fn new(dim: usize) -> Self {
        Self { dim, chart_radius: 0.999 }
    }
}

impl Geometry for Hyperbolic {
    fn name(&self) -> &str {
        "hyperbolic"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn in_domain(&self, _chart: ChartId, x: &[f64]) -> bool {
        norm_sq(x) <= self.chart_radius * self.chart_radius
    }
    fn metric(&self, _chart: ChartId, x: &[f64]) -> DMatrix<f64> {
        let lam = 2.0 / (1.0 - norm_sq(x));
        DMatrix::identity(self.dim, self.dim) * (lam * lam)
    }
    fn christoffel(&self, _chart: ChartId, x: &[f64], out: &mut [f64]) {
        let denom = 1.0 - norm_sq(x);
        let mut dpsi = [0.0; 8];
        let n = x.len();
        for i in 0..n {
            dpsi[i] = 2.0 * x[i] / denom;
        }
        conformal_christoffel(&dpsi[..n], out);
    }
    fn from_embedding(&self, y: &[f64]) -> Option<Point> {
        (y.len() == self.dim).then(|| Point::new(0, y))
    }
    fn injectivity_radius(&self) -> f64 {
        f64::INFINITY
    }
    fn working_radius(&self) -> f64 {
        2.0
    }
}

/// Paraboloid of revolution `z = x² + y²`.
///
/// Chart 0 is the graph chart `(u, v) ↦ (u, v, u² + v²)`; chart 1 is the
/// polar chart `(s, θ) ↦ (s cos θ, s sin θ, s²)`, valid away from the vertex.
#[derive(Debug, Clone)]
pub struct Paraboloid {
    pub half_width: f64,
}

impl Paraboloid {
    pub fn new() -> Self {
        Self { half_width: 10.0 }
    }
}

impl Default for Paraboloid {
    fn default() -> Self {
        Self::new()
    }
}

impl Geometry for Paraboloid {
    fn name(&self) -> &str {
        "paraboloid"
    }
    fn dim(&self) -> usize {
        2
    }
    fn chart_count(&self) -> usize {
        2
    }
    fn in_domain(&self, chart: ChartId, x: &[f64]) -> bool {
        match chart {
            0 => x.iter().all(|c| c.abs() <= self.half_width),
            1 => x[0] >= 1e-3 && x[0] <= self.half_width && x[1].abs() <= 8.0 * core::f64::consts::PI,
            _ => false,
        }
    }
    fn metric(&self, chart: ChartId, x: &[f64]) -> DMatrix<f64> {
        match chart {
            0 => {
                let mut g = DMatrix::identity(2, 2);
                for i in 0..2 {
                    for j in 0..2 {
                        g[(i, j)] += 4.0 * x[i] * x[j];
                    }
                }
                g
            }
            _ => {
                let s = x[0];
                DMatrix::from_row_slice(2, 2, &[1.0 + 4.0 * s * s, 0.0, 0.0, s * s])
            }
        }
    }
    fn christoffel(&self, chart: ChartId, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        match chart {
            0 => {
                let w = 1.0 + 4.0 * norm_sq(x);
                for k in 0..2 {
                    for i in 0..2 {
                        out[k * 4 + i * 2 + i] = 4.0 * x[k] / w;
                    }
                }
            }
            _ => {
                let s = x[0];
                let w = 1.0 + 4.0 * s * s;
                out[0] = 4.0 * s / w; // Γ^s_ss
                out[3] = -s / w; // Γ^s_θθ
                out[4 + 1] = 1.0 / s; // Γ^θ_sθ
                out[4 + 2] = 1.0 / s; // Γ^θ_θs
            }
        }
    }
    fn embed(&self, chart: ChartId, x: &[f64]) -> Option<DVector<f64>> {
        Some(match chart {
            0 => DVector::from_column_slice(&[x[0], x[1], x[0] * x[0] + x[1] * x[1]]),
            _ => DVector::from_column_slice(&[x[0] * x[1].cos(), x[0] * x[1].sin(), x[0] * x[0]]),
        })
    }
    fn from_embedding(&self, y: &[f64]) -> Option<Point> {
        (y.len() == 3).then(|| Point::new(0, &y[..2]))
    }
    fn transition(&self, from: ChartId, to: ChartId, x: &[f64]) -> Option<DVector<f64>> {
        match (from, to) {
            (a, b) if a == b => Some(DVector::from_column_slice(x)),
            (0, 1) => {
                let s = norm_sq(x).sqrt();
                (s > 0.0).then(|| DVector::from_column_slice(&[s, x[1].atan2(x[0])]))
            }
            (1, 0) => Some(DVector::from_column_slice(&[x[0] * x[1].cos(), x[0] * x[1].sin()])),
            _ => None,
        }
    }
    fn transition_jacobian(&self, from: ChartId, to: ChartId, x: &[f64]) -> Option<DMatrix<f64>> {
        match (from, to) {
            (a, b) if a == b => Some(DMatrix::identity(2, 2)),
            (0, 1) => {
                let r2 = norm_sq(x);
                let s = r2.sqrt();
                (s > 0.0).then(|| {
                    DMatrix::from_row_slice(2, 2, &[x[0] / s, x[1] / s, -x[1] / r2, x[0] / r2])
                })
            }
            (1, 0) => {
                let (sn, cs) = x[1].sin_cos();
                Some(DMatrix::from_row_slice(2, 2, &[cs, -x[0] * sn, sn, x[0] * cs]))
            }
            _ => None,
        }
    }
    fn preferred_chart(&self, chart: ChartId, x: &[f64]) -> ChartId {
        if chart == 1 && x[0] < 0.05 {
            0
        } else {
            chart
        }
    }
    fn injectivity_radius(&self) -> f64 {
        // π/√K_max with K_max = 4 at the vertex.
        core::f64::consts::FRAC_PI_2
    }
}

/// Surface of revolution `z = p(s)` in polar coordinates `(s, θ)`.
///
/// Christoffel symbols come from finite differences of the metric.
#[derive(Debug, Clone)]
pub struct SurfaceOfRevolution {
    /// Coefficients of `p(s) = Σ c_k s^k`.
    pub profile: Vec<f64>,
    pub s_min: f64,
    pub s_max: f64,
    pub fd_step: f64,
}

impl SurfaceOfRevolution {
    pub fn new(profile: Vec<f64>) -> Self {
        Self { profile, s_min: 1e-2, s_max: 10.0, fd_step: 1e-5 }
    }

    pub fn profile_value(&self, s: f64) -> f64 {
        self.profile.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    pub fn profile_slope(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (k, c) in self.profile.iter().enumerate().skip(1).rev() {
            acc = acc * s + *c * k as f64;
        }
        acc
    }
}

impl Geometry for SurfaceOfRevolution {
    fn name(&self) -> &str {
        "surface_of_revolution"
    }
    fn dim(&self) -> usize {
        2
    }
    fn in_domain(&self, _chart: ChartId, x: &[f64]) -> bool {
        x[0] >= self.s_min && x[0] <= self.s_max && x[1].abs() <= 8.0 * core::f64::consts::PI
    }
    fn metric(&self, _chart: ChartId, x: &[f64]) -> DMatrix<f64> {
        let d = self.profile_slope(x[0]);
        DMatrix::from_row_slice(2, 2, &[1.0 + d * d, 0.0, 0.0, x[0] * x[0]])
    }
    fn christoffel(&self, chart: ChartId, x: &[f64], out: &mut [f64]) {
        super::christoffel_from_metric(self, chart, x, self.fd_step, out)
    }
    fn embed(&self, _chart: ChartId, x: &[f64]) -> Option<DVector<f64>> {
        Some(DVector::from_column_slice(&[
            x[0] * x[1].cos(),
            x[0] * x[1].sin(),
            self.profile_value(x[0]),
        ]))
    }
    fn from_embedding(&self, y: &[f64]) -> Option<Point> {
        if y.len() != 3 {
            return None;
        }
        let s = (y[0] * y[0] + y[1] * y[1]).sqrt();
        Some(Point::new(0, &[s, y[1].atan2(y[0])]))
    }
}
