//! Chart-based Riemannian calculus.
//!
//! A [`Manifold`] wraps a [`Geometry`] (charts plus a metric tensor, and
//! optionally analytic Christoffel symbols and an embedding) together with
//! geometric hints and the [`ToleranceProfile`] every routine reads from.

mod builtin;
mod comparison;
mod curvature;
mod fermi;
mod geodesic;
mod hessian;
pub(crate) mod ode;

pub use builtin::{Euclidean, Hyperbolic, Paraboloid, Sphere, SurfaceOfRevolution};
pub use comparison::TriangleData;
pub use curvature::CurvatureBound;
pub use fermi::FermiChart;
pub use geodesic::{GeodesicPath, GeodesicSample, LogOutcome, LogStrategy};
pub(crate) use geodesic::simpson;

use crate::prelude::*;
use crate::{GeoError, Result, ToleranceProfile};

pub type ChartId = usize;

/// A point given by its coordinates in one chart.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub chart: ChartId,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_vec"))]
    pub coords: DVector<f64>,
}

impl Point {
    pub fn new(chart: ChartId, coords: &[f64]) -> Self {
        Self { chart, coords: DVector::from_column_slice(coords) }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Components of a tangent vector in the coordinate basis of its base chart.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TangentVector {
    pub base: Point,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_vec"))]
    pub components: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: Point, components: DVector<f64>) -> Self {
        Self { base, components }
    }

    pub fn from_slice(base: &Point, components: &[f64]) -> Self {
        Self { base: base.clone(), components: DVector::from_column_slice(components) }
    }

    pub fn zero(base: &Point) -> Self {
        Self { base: base.clone(), components: DVector::zeros(base.dim()) }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { base: self.base.clone(), components: &self.components * s }
    }
}

/// Charts and metric of a Riemannian manifold.
///
/// Only [`Geometry::metric`] and the domain test are required; Christoffel
/// symbols default to central differences of the metric.
pub trait Geometry: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn chart_count(&self) -> usize {
        1
    }
    fn in_domain(&self, chart: ChartId, x: &[f64]) -> bool;
    /// Metric tensor `g_ij` at chart coordinates `x`.
    fn metric(&self, chart: ChartId, x: &[f64]) -> DMatrix<f64>;
    /// Writes `Γ^k_ij` into `out[k*n*n + i*n + j]`.
    fn christoffel(&self, chart: ChartId, x: &[f64], out: &mut [f64]) {
        christoffel_from_metric(self, chart, x, 1e-5, out)
    }
    fn embed(&self, _chart: ChartId, _x: &[f64]) -> Option<DVector<f64>> {
        None
    }
    fn from_embedding(&self, _y: &[f64]) -> Option<Point> {
        None
    }
    /// Coordinates of `x` (given in chart `from`) in chart `to`.
    fn transition(&self, from: ChartId, to: ChartId, x: &[f64]) -> Option<DVector<f64>> {
        (from == to).then(|| DVector::from_column_slice(x))
    }
    /// Jacobian of [`Geometry::transition`] at `x`; central differences by default.
    fn transition_jacobian(&self, from: ChartId, to: ChartId, x: &[f64]) -> Option<DMatrix<f64>> {
        let n = x.len();
        let mut jac = DMatrix::zeros(n, n);
        let mut xp = x.to_vec();
        for j in 0..n {
            let h = 1e-6 * x[j].abs().max(1.0);
            xp[j] = x[j] + h;
            let fp = self.transition(from, to, &xp)?;
            xp[j] = x[j] - h;
            let fm = self.transition(from, to, &xp)?;
            xp[j] = x[j];
            jac.set_column(j, &((fp - fm) / (2.0 * h)));
        }
        Some(jac)
    }
    /// Chart an integrator should continue in once it reaches `x`.
    fn preferred_chart(&self, chart: ChartId, _x: &[f64]) -> ChartId {
        chart
    }
    /// A lower bound on the injectivity radius; `0.0` when unknown.
    fn injectivity_radius(&self) -> f64 {
        0.0
    }
    /// Radius used for convexity estimates when curvature does not bound it.
    fn working_radius(&self) -> f64 {
        1.0
    }
}

/// `Γ^k_ij = ½ g^{kl}(∂_i g_lj + ∂_j g_li − ∂_l g_ij)` with central differences.
pub fn christoffel_from_metric<G: Geometry + ?Sized>(
    geom: &G,
    chart: ChartId,
    x: &[f64],
    step: f64,
    out: &mut [f64],
) {
    let n = x.len();
    let mut dg: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    let mut xp = x.to_vec();
    for l in 0..n {
        let h = step * x[l].abs().max(1.0);
        xp[l] = x[l] + h;
        let gp = geom.metric(chart, &xp);
        xp[l] = x[l] - h;
        let gm = geom.metric(chart, &xp);
        xp[l] = x[l];
        dg.push((gp - gm) / (2.0 * h));
    }
    let ginv = geom.metric(chart, x).try_inverse().unwrap_or_else(|| DMatrix::zeros(n, n));
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
                }
                out[k * n * n + i * n + j] = 0.5 * acc;
            }
        }
    }
}

/// Convexity-radius hint: a constant or a function of the point.
#[derive(Clone)]
pub enum RadiusHint {
    Constant(f64),
    Function(Arc<dyn Fn(&Point) -> f64 + Send + Sync>),
}

impl core::fmt::Debug for RadiusHint {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RadiusHint::Constant(r) => write!(f, "Constant({r})"),
            RadiusHint::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// A Riemannian manifold with hints and tolerances.
#[derive(Clone)]
pub struct Manifold {
    geometry: Arc<dyn Geometry>,
    pub curvature_bound_hint: Option<f64>,
    pub convexity_radius_hint: Option<RadiusHint>,
    pub injectivity_hint: Option<f64>,
    pub tol: ToleranceProfile,
}

impl core::fmt::Debug for Manifold {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Manifold")
            .field("geometry", &self.geometry.name())
            .field("dim", &self.dim())
            .finish()
    }
}

impl Manifold {
    pub fn new<G: Geometry + 'static>(geometry: G) -> Self {
        Self::from_arc(Arc::new(geometry))
    }

    pub fn from_arc(geometry: Arc<dyn Geometry>) -> Self {
        Self {
            geometry,
            curvature_bound_hint: None,
            convexity_radius_hint: None,
            injectivity_hint: None,
            tol: ToleranceProfile::default(),
        }
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(Euclidean::new(dim))
    }

    /// Unit 2-sphere.
    pub fn sphere() -> Self {
        Self::new(Sphere::new(2))
    }

    /// Poincaré disk model of the hyperbolic plane.
    pub fn hyperbolic() -> Self {
        Self::new(Hyperbolic::new(2))
    }

    /// Paraboloid of revolution `z = x² + y²`.
    pub fn paraboloid() -> Self {
        Self::new(Paraboloid::new())
    }

    pub fn with_tolerances(mut self, tol: ToleranceProfile) -> Self {
        self.tol = tol;
        self
    }

    pub fn geometry(&self) -> &dyn Geometry {
        &*self.geometry
    }

    pub fn name(&self) -> &str {
        self.geometry.name()
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn injectivity_radius(&self) -> f64 {
        self.injectivity_hint.unwrap_or_else(|| self.geometry.injectivity_radius())
    }

    pub fn metric(&self, p: &Point) -> DMatrix<f64> {
        self.geometry.metric(p.chart, p.coords.as_slice())
    }

    pub fn christoffel(&self, p: &Point) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n * n];
        self.geometry.christoffel(p.chart, p.coords.as_slice(), &mut out);
        out
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(GeoError::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        if p.chart >= self.geometry.chart_count() {
            return Err(GeoError::InvalidInput(alloc::format!("unknown chart {}", p.chart)));
        }
        if !self.geometry.in_domain(p.chart, p.coords.as_slice()) {
            return Err(GeoError::ChartExit);
        }
        Ok(())
    }

    /// Re-expresses `p` in `chart`.
    pub fn to_chart(&self, p: &Point, chart: ChartId) -> Result<Point> {
        if p.chart == chart {
            return Ok(p.clone());
        }
        let coords = self
            .geometry
            .transition(p.chart, chart, p.coords.as_slice())
            .ok_or(GeoError::ChartExit)?;
        if !self.geometry.in_domain(chart, coords.as_slice()) {
            return Err(GeoError::ChartExit);
        }
        Ok(Point { chart, coords })
    }

    pub fn embed(&self, p: &Point) -> Option<DVector<f64>> {
        self.geometry.embed(p.chart, p.coords.as_slice())
    }

    pub fn point_from_embedding(&self, y: &[f64]) -> Result<Point> {
        self.geometry.from_embedding(y).ok_or_else(|| {
            GeoError::InvalidInput(alloc::format!("{} has no embedding inverse", self.name()))
        })
    }

    pub fn inner(&self, p: &Point, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (u.transpose() * self.metric(p) * w)[(0, 0)]
    }

    pub fn norm(&self, v: &TangentVector) -> f64 {
        self.inner(&v.base, &v.components, &v.components).max(0.0).sqrt()
    }

    /// Unit vector (metric norm) in the direction of `v`; `None` for zero.
    pub fn normalize(&self, v: &TangentVector) -> Option<TangentVector> {
        let n = self.norm(v);
        (n > 0.0 && n.is_finite()).then(|| v.scaled(1.0 / n))
    }

    /// Angle between two tangent vectors at the same base point.
    pub fn angle(&self, p: &Point, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
        let g = self.metric(p);
        let uu = (u.transpose() * &g * u)[(0, 0)];
        let ww = (w.transpose() * &g * w)[(0, 0)];
        let uw = (u.transpose() * &g * w)[(0, 0)];
        let c = (uw / (uu * ww).sqrt()).clamp(-1.0, 1.0);
        c.acos()
    }

    /// Orthonormal frame at `p` (columns), Gram–Schmidt in the metric.
    ///
    /// When `first` is given and nonzero, the frame starts with its direction.
    pub fn orthonormal_frame(&self, p: &Point, first: Option<&DVector<f64>>) -> DMatrix<f64> {
        let n = self.dim();
        let g = self.metric(p);
        let ip = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &g * b)[(0, 0)];
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut candidates: Vec<DVector<f64>> = Vec::new();
        if let Some(f) = first {
            candidates.push(f.clone());
        }
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            candidates.push(e);
        }
        for mut c in candidates {
            if cols.len() == n {
                break;
            }
            for _ in 0..2 {
                for b in &cols {
                    let proj = ip(&c, b);
                    c -= b * proj;
                }
            }
            let nn = ip(&c, &c).max(0.0).sqrt();
            if nn > 1e-10 {
                cols.push(c / nn);
            }
        }
        DMatrix::from_columns(&cols)
    }
}

/// A symmetric bilinear form on `T_pM`, stored in coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    pub base: Point,
    pub matrix: DMatrix<f64>,
}

impl BilinearForm {
    pub fn eval(&self, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (v.transpose() * &self.matrix * w)[(0, 0)]
    }

    /// Matrix of the form in an orthonormal frame at the base point.
    pub fn in_orthonormal_frame(&self, m: &Manifold) -> DMatrix<f64> {
        let e = m.orthonormal_frame(&self.base, None);
        e.transpose() * &self.matrix * e
    }

    /// Eigenvalues relative to the metric, ascending.
    pub fn eigenvalues(&self, m: &Manifold) -> Vec<f64> {
        sorted_eigenvalues(&self.in_orthonormal_frame(m))
    }

    pub fn min_eigenvalue(&self, m: &Manifold) -> f64 {
        self.eigenvalues(m).first().copied().unwrap_or(0.0)
    }

    /// Largest deviation from symmetry, relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.matrix.amax().max(1e-300);
        (&self.matrix - self.matrix.transpose()).amax() / scale
    }
}

pub(crate) fn sorted_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Unit eigenvector of the smallest eigenvalue of a symmetric matrix.
pub(crate) fn min_eigenpair(a: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let sym = (a + a.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut idx = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[idx] {
            idx = i;
        }
    }
    (eig.eigenvalues[idx], eig.eigenvectors.column(idx).into_owned())
}
