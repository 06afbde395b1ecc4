//! Sampled convexity of a function (or of `d_S`) along geodesics.

use rand::Rng as _;

use crate::cone::{nonzero_normal, NormalOptions};
use crate::manifold::{Manifold, Point, TangentVector};
use crate::prelude::*;
use crate::sets::random_unit;
use crate::tubular::tube_radius;
use crate::{ConvexSet, GeoError, Result, ScalarField, SetSpec};

use super::signed::{second_fundamental_form, SignedDistanceField};

/// Function whose convexity is tested.
#[derive(Debug, Clone)]
pub enum ReportTarget {
    Field(ScalarField),
    /// `d_S`, evaluated by projection.
    Distance(Arc<ConvexSet>),
}

/// Where the test geodesics live.
#[derive(Debug, Clone)]
pub enum ReportRegion {
    /// Points `exp_x(t v)` with `x ∈ bd S`, `t < fraction·t_x`; every
    /// sampled point must satisfy `d_S ≤ fraction·t_x`.
    Tube { set: Arc<ConvexSet>, fraction: f64, epsilon: Option<f64> },
    /// Geodesic ball; every sampled point must lie inside.
    Ball { center: Point, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub n_geodesics: usize,
    pub seed: u64,
    /// Number of points per geodesic (odd).
    pub points: usize,
    /// Boundary samples for the second fundamental form.
    pub boundary_samples: usize,
    /// `min h_x` above this asserts that the report must pass.
    pub h_margin: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { n_geodesics: 100, seed: 0, points: 21, boundary_samples: 30, h_margin: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GeodesicProfile {
    pub id: usize,
    pub center: Point,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_vec"))]
    pub direction: DVector<f64>,
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    /// Second-difference quotients at the interior points.
    pub second_differences: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConvexityReport {
    pub pass: bool,
    pub n_geodesics: usize,
    pub min_second_difference: f64,
    pub step: f64,
    pub tolerance: f64,
    pub worst: Option<GeodesicProfile>,
    pub profiles: Vec<GeodesicProfile>,
    /// Smallest eigenvalue of `h_x` over sampled boundary points (distance targets).
    pub min_h: Option<f64>,
    /// The convexity theorem predicts a pass (`min_h` above the margin).
    pub asserted: bool,
}

impl ConvexityReport {
    /// A report that contradicts its own assertion.
    pub fn consistent(&self) -> bool {
        !self.asserted || self.pass
    }
}

struct Evaluator<'a> {
    m: &'a Manifold,
    target: &'a ReportTarget,
}

impl Evaluator<'_> {
    fn values(&self, pts: &[Point]) -> Result<Vec<f64>> {
        match self.target {
            ReportTarget::Field(f) => pts.iter().map(|p| f.eval(self.m, p)).collect(),
            ReportTarget::Distance(set) => {
                let mut out = Vec::with_capacity(pts.len());
                let mut hint: Option<Point> = None;
                for p in pts {
                    let res = match (&hint, set.implicit()) {
                        (Some(h), Some(_)) => set.project_with_hint(self.m, p, h)?,
                        _ => set.project(self.m, p)?,
                    };
                    hint = res.minimizers.first().cloned();
                    out.push(res.value);
                }
                Ok(out)
            }
        }
    }
}

/// Second differences of the target along sampled geodesics, step
/// `second_diff_step`, accepted when `≥ −second_diff_tol·(1 + |g|)`.
pub fn convexity_report(
    m: &Manifold,
    target: &ReportTarget,
    region: &ReportRegion,
    opts: &ReportOptions,
) -> Result<ConvexityReport> {
    let h = m.tol.second_diff_step;
    let tol = m.tol.second_diff_tol;
    let half = (opts.points.max(3) / 2) as i64;
    let s: Vec<f64> = (-half..=half).map(|k| k as f64 * h).collect();
    let mut rng = crate::rng_from_seed(opts.seed);
    let eval = Evaluator { m, target };

    let mut profiles = Vec::with_capacity(opts.n_geodesics);
    let mut attempts = 0;
    while profiles.len() < opts.n_geodesics && attempts < 20 * opts.n_geodesics.max(1) {
        attempts += 1;
        let (center, limit) = match region {
            ReportRegion::Ball { center, radius } => {
                let u = random_unit(m, center, &mut rng);
                let r = radius * rng.random::<f64>().sqrt();
                (m.exp(&TangentVector::new(center.clone(), u * r))?, None)
            }
            ReportRegion::Tube { set, fraction, epsilon } => {
                let foot = set.boundary_sample(m, 1, rng.random())?.remove(0);
                let tx = tube_radius(m, &foot, *epsilon)?.t_x;
                let v = match outward_normal(m, set, &foot, rng.random()) {
                    Ok(v) => v,
                    // Normal cones of lower-dimensional sets need not cluster; any
                    // direction works since the tube limit is checked on the values.
                    Err(GeoError::NoConvergence(_)) => TangentVector::new(foot.clone(), random_unit(m, &foot, &mut rng)),
                    Err(e) => return Err(e),
                };
                let t = fraction * tx * rng.random::<f64>();
                (m.exp(&v.scaled(t))?, Some(fraction * tx))
            }
        };
        let dir = random_unit(m, &center, &mut rng);
        let Ok(pts) = geodesic_points(m, &center, &dir, &s) else { continue };
        let inside = match region {
            ReportRegion::Ball { center: c, radius } => {
                pts.iter().all(|p| m.distance(c, p).map(|d| d <= *radius).unwrap_or(false))
            }
            ReportRegion::Tube { .. } => true,
        };
        if !inside {
            continue;
        }
        let values = eval.values(&pts)?;
        if let Some(lim) = limit {
            if values.iter().any(|v| *v > lim) {
                continue;
            }
        }
        let second: Vec<f64> =
            (1..values.len() - 1).map(|i| (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h)).collect();
        let pass = second.iter().enumerate().all(|(i, d)| *d >= -tol * (1.0 + values[i + 1].abs()));
        profiles.push(GeodesicProfile {
            id: profiles.len(),
            center,
            direction: dir,
            s: s.clone(),
            values,
            second_differences: second,
            pass,
        });
    }

    let min_second_difference =
        profiles.iter().flat_map(|p| p.second_differences.iter().copied()).fold(f64::INFINITY, f64::min);
    let worst = profiles
        .iter()
        .filter(|p| !p.pass)
        .min_by(|a, b| {
            let ma = a.second_differences.iter().copied().fold(f64::INFINITY, f64::min);
            let mb = b.second_differences.iter().copied().fold(f64::INFINITY, f64::min);
            ma.total_cmp(&mb).then(a.id.cmp(&b.id))
        })
        .cloned();
    let min_h = match target {
        ReportTarget::Distance(set) => boundary_min_h(m, set, opts.boundary_samples, opts.seed)?,
        ReportTarget::Field(_) => None,
    };
    Ok(ConvexityReport {
        pass: worst.is_none() && !profiles.is_empty(),
        n_geodesics: profiles.len(),
        min_second_difference,
        step: h,
        tolerance: tol,
        worst,
        profiles,
        min_h,
        asserted: min_h.is_some_and(|v| v > opts.h_margin),
    })
}

fn geodesic_points(m: &Manifold, center: &Point, dir: &DVector<f64>, s: &[f64]) -> Result<Vec<Point>> {
    let pos: Vec<f64> = s.iter().copied().filter(|t| *t > 0.0).collect();
    let neg: Vec<f64> = s.iter().rev().copied().filter(|t| *t < 0.0).map(|t| -t).collect();
    let fwd = m.transport_along(center, dir, &[], &pos)?;
    let back = m.transport_along(center, &-dir, &[], &neg)?;
    let mut out: Vec<Point> = back.into_iter().rev().map(|(p, _)| p.point).collect();
    out.push(center.clone());
    out.extend(fwd.into_iter().map(|(p, _)| p.point));
    Ok(out)
}

/// Unit outward normal: analytic for balls and sublevel sets, constructed otherwise.
fn outward_normal(m: &Manifold, set: &Arc<ConvexSet>, x: &Point, seed: u64) -> Result<TangentVector> {
    match &set.spec {
        SetSpec::GeodesicBall { .. } | SetSpec::Sublevel { .. } => {
            let sdf = SignedDistanceField::new_unchecked(set.clone());
            Ok(sdf.inward_normal(m, x)?.scaled(-1.0))
        }
        _ => nonzero_normal(m, set, x, &NormalOptions { seed, ..NormalOptions::default() }),
    }
}

fn boundary_min_h(m: &Manifold, set: &Arc<ConvexSet>, n: usize, seed: u64) -> Result<Option<f64>> {
    if !matches!(set.spec, SetSpec::GeodesicBall { .. } | SetSpec::Sublevel { .. }) || n == 0 {
        return Ok(None);
    }
    let sdf = SignedDistanceField::new(m, set.clone())?;
    let mut min_h = f64::INFINITY;
    for x in set.boundary_sample(m, n, seed ^ 0xb0)? {
        min_h = min_h.min(second_fundamental_form(m, &sdf, &x)?.min_eigenvalue());
    }
    Ok(Some(min_h))
}
