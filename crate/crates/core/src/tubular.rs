//! The tubular neighbourhood `W` on which metric projection is single-valued.

use rand::Rng as _;

use crate::cone::{nonzero_normal, NormalOptions};
use crate::manifold::{CurvatureBound, Manifold, Point, TangentVector};
use crate::prelude::*;
use crate::{ConvexSet, GeoError, Result};

/// `t_x = min(π/(2√δ_x), ε(x)/2)` with its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeRadius {
    pub t_x: f64,
    pub epsilon: f64,
    pub delta: CurvatureBound,
}

/// Tube radius at `x ∈ bd S`. `ε(x)` defaults to the convexity radius at `x`.
pub fn tube_radius(m: &Manifold, x: &Point, epsilon: Option<f64>) -> Result<TubeRadius> {
    let epsilon = match epsilon {
        Some(e) if e > 0.0 => e,
        Some(_) => return Err(GeoError::InvalidInput("epsilon must be positive".into())),
        None => m.convexity_radius(x)?,
    };
    let delta = m.local_curvature_bound(x, epsilon)?;
    let t_x = delta.half_conjugate_radius().min(0.5 * epsilon);
    Ok(TubeRadius { t_x, epsilon, delta })
}

/// A point `exp_x(t v)` of the tube.
#[derive(Debug, Clone, PartialEq)]
pub struct TubePoint {
    pub foot: Point,
    /// Unit proximal normal at the foot.
    pub direction: TangentVector,
    pub t: f64,
    pub t_x: f64,
    pub point: Point,
}

impl TubePoint {
    /// Builds `exp_x(t v)`; rejects `t` outside `(0, t_x)`.
    pub fn new(m: &Manifold, foot: Point, direction: TangentVector, t: f64, t_x: f64) -> Result<Self> {
        if !(t > 0.0 && t < t_x) {
            return Err(GeoError::InvalidInput("tube parameter outside (0, t_x)".into()));
        }
        let direction = m.normalize(&direction).ok_or(GeoError::InvalidInput("zero normal".into()))?;
        let point = m.exp(&direction.scaled(t))?;
        Ok(Self { foot, direction, t, t_x, point })
    }
}

/// `n` tube points with feet from boundary sampling, normals from
/// [`nonzero_normal`] and `t` uniform in `(0.05, 0.95)·t_x`.
pub fn tube_sample(m: &Manifold, set: &ConvexSet, n: usize, seed: u64, epsilon: Option<f64>) -> Result<Vec<TubePoint>> {
    let feet = set.boundary_sample(m, n, seed)?;
    let mut rng = crate::rng_from_seed(seed ^ 0x5eed_7b);
    let mut out = Vec::with_capacity(n);
    for (i, foot) in feet.into_iter().enumerate() {
        let r = tube_radius(m, &foot, epsilon)?;
        let opts = NormalOptions { seed: seed.wrapping_add(i as u64), ..NormalOptions::default() };
        let v = nonzero_normal(m, set, &foot, &opts)?;
        let t = r.t_x * (0.05 + 0.9 * rng.random::<f64>());
        out.push(TubePoint::new(m, foot, v, t, r.t_x)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UniquenessEntry {
    pub t: f64,
    pub t_x: f64,
    pub unique: bool,
    /// Distance from the computed minimizer to the foot.
    pub foot_error: f64,
    /// `|d_S(point) − t|`.
    pub value_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UniquenessReport {
    pub entries: Vec<UniquenessEntry>,
    /// Indices of entries that are not unique or miss the foot by more than `1e-4`.
    pub failures: Vec<usize>,
    pub max_foot_error: f64,
}

impl UniquenessReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Projects every tube point and compares the minimizer with its foot.
pub fn verify_projection_uniqueness(m: &Manifold, set: &ConvexSet, pts: &[TubePoint]) -> Result<UniquenessReport> {
    let mut report = UniquenessReport { entries: Vec::new(), failures: Vec::new(), max_foot_error: 0.0 };
    for (i, tp) in pts.iter().enumerate() {
        let res = set.project(m, &tp.point)?;
        let foot_error = res
            .minimizers
            .iter()
            .map(|z| m.distance(z, &tp.foot).unwrap_or(f64::INFINITY))
            .fold(f64::INFINITY, f64::min);
        let unique = !res.duplicate_flag;
        let entry = UniquenessEntry {
            t: tp.t,
            t_x: tp.t_x,
            unique,
            foot_error,
            value_error: (res.value - tp.t).abs(),
        };
        if !unique || !(foot_error <= 1e-4) {
            report.failures.push(i);
        }
        report.max_foot_error = report.max_foot_error.max(foot_error);
        report.entries.push(entry);
    }
    Ok(report)
}
