//! Checks shared by the convex-set scenarios.

use std::f64::consts::PI;
use std::sync::Arc;

use proxgeo_core::cone::{is_normal_projection, nonzero_normal, ConeMode, ConeOptions, ConeSamples, NormalOptions};
use proxgeo_core::convexity::{
    convexity_report, second_fundamental_form, ReportOptions, ReportRegion, ReportTarget, SignedDistanceField,
};
use proxgeo_core::separation::{support_hypersurface, verify_support, SupportOptions};
use proxgeo_core::tubular::{tube_radius, tube_sample, verify_projection_uniqueness};
use proxgeo_core::{ConvexSet, GeoError, Manifold, Point, Result, SetSpec, TangentVector};
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{mix, point_json};
use crate::report::{Check, Sample};

/// Unit outward normal: analytic for balls and sublevel sets, constructed otherwise.
pub fn outward_normal(m: &Manifold, set: &Arc<ConvexSet>, x: &Point, seed: u64) -> Result<TangentVector> {
    match set.spec {
        SetSpec::GeodesicBall { .. } | SetSpec::Sublevel { .. } => {
            Ok(SignedDistanceField::new(m, set.clone())?.inward_normal(m, x)?.scaled(-1.0))
        }
        _ => nonzero_normal(m, set, x, &NormalOptions { seed, ..NormalOptions::default() }),
    }
}

struct ConePair {
    theta: f64,
    definition: bool,
    projection: bool,
    flagged: bool,
    x: Point,
}

/// Definition (convex mode) against projection test on `n` pairs `(x, v)`,
/// four per boundary point sharing one draw of `S ∩ B(x, ε)`: the exact
/// outward normal, the inward normal and two tilts `θ ∈ [0.1, π − 0.1]`.
pub fn cone_equivalence(m: &Manifold, set: &Arc<ConvexSet>, n: usize, seed: u64) -> Check {
    const NAME: &str = "cone_definition_matches_projection";
    let groups: Result<Vec<Vec<ConePair>>> = (0..n.div_ceil(4))
        .into_par_iter()
        .map(|g| {
            let s = mix(seed, g as u64);
            let mut rng = proxgeo_core::rng_from_seed(s);
            let x = set.boundary_sample(m, 1, s)?.remove(0);
            let nrm = outward_normal(m, set, &x, s)?;
            let frame = m.orthonormal_frame(&x, Some(&nrm.components));
            let t_x = tube_radius(m, &x, None)?.t_x;
            let samples = match ConeSamples::draw(m, set, &x, &ConeOptions { seed: s, ..ConeOptions::default() }) {
                Ok(c) => Some(c),
                Err(GeoError::AmbiguousSolution { .. }) => None,
                Err(e) => return Err(e),
            };
            let mut out = Vec::new();
            for i in (4 * g)..(4 * g + 4).min(n) {
                let theta = match i % 4 {
                    0 => 0.0,
                    1 => PI,
                    _ => 0.1 + (PI - 0.2) * rng.random::<f64>(),
                };
                let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let scale = 0.5 + 1.5 * rng.random::<f64>();
                let v = TangentVector::new(
                    x.clone(),
                    (frame.column(0) * theta.cos() + frame.column(1) * (side * theta.sin())) * scale,
                );
                let definition = samples.as_ref().is_some_and(|c| c.test(m, &v, ConeMode::Convex).member);
                let proj = is_normal_projection(m, set, &x, &v, t_x)?;
                out.push(ConePair { theta, definition, projection: proj.member, flagged: samples.is_none() || proj.ambiguous, x: x.clone() });
            }
            Ok(out)
        })
        .collect();
    let pairs: Result<Vec<ConePair>> = groups.map(|g| g.into_iter().flatten().collect());
    let pairs = match pairs {
        Ok(p) => p,
        Err(e) => return Check::errored(NAME, "proximal_cone", e),
    };
    let unflagged: Vec<&ConePair> = pairs.iter().filter(|p| !p.flagged).collect();
    let agree = unflagged.iter().filter(|p| p.definition == p.projection).count();
    let frac = if unflagged.is_empty() { 0.0 } else { agree as f64 / unflagged.len() as f64 };
    let members = unflagged.iter().filter(|p| p.definition).count();
    let samples = pairs
        .iter()
        .map(|p| Sample { params: vec![p.theta, p.definition as u8 as f64], value: p.projection as u8 as f64 })
        .collect();
    let mut c = Check::new(NAME, "proximal_cone", frac == 1.0 && !unflagged.is_empty(), frac, 1.0, "agreement fraction on unflagged pairs = 1")
        .with_samples(samples);
    let summary = json!({ "pairs": n, "flagged": n - unflagged.len(), "members": members });
    match pairs.iter().find(|p| !p.flagged && p.definition != p.projection) {
        Some(p) => {
            c = c.with_witness(json!({
                "summary": summary,
                "x": point_json(&p.x),
                "theta": p.theta,
                "definition": p.definition,
                "projection": p.projection,
            }))
        }
        None => c = c.with_witness(json!({ "summary": summary })),
    }
    c
}

/// `n` tube points at `t ∈ (0.05, 0.95)·t_x` project uniquely onto their feet.
pub fn tube_uniqueness(m: &Manifold, set: &Arc<ConvexSet>, n: usize, seed: u64) -> Check {
    const NAME: &str = "tube_projection_unique";
    let entries: Result<Vec<_>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pts = tube_sample(m, set, 1, mix(seed, i as u64), None)?;
            let r = verify_projection_uniqueness(m, set, &pts)?;
            Ok((pts[0].point.clone(), r.entries[0].clone()))
        })
        .collect();
    let entries = match entries {
        Ok(e) => e,
        Err(e) => return Check::errored(NAME, "tubular", e),
    };
    let max_err = entries.iter().map(|(_, e)| e.foot_error).fold(0.0, f64::max);
    let bad = entries.iter().find(|(_, e)| !e.unique || !(e.foot_error <= 1e-4));
    let samples = entries.iter().map(|(_, e)| Sample { params: vec![e.t / e.t_x], value: e.foot_error }).collect();
    let mut c = Check::new(NAME, "tubular", bad.is_none(), max_err, 1e-4, "max foot error, every projection unique").with_samples(samples);
    if let Some((p, e)) = bad {
        c = c.with_witness(json!({ "point": point_json(p), "entry": e }));
    }
    c
}

/// Support hypersurfaces at `bases` boundary points: equality on the normal
/// ray at 5 values of `t`, and `d_H ≤ d_S` on `n` samples of `U_x`.
pub fn support(m: &Manifold, set: &Arc<ConvexSet>, bases: usize, n: usize, seed: u64) -> Vec<Check> {
    let run = || -> Result<Vec<(Point, f64, proxgeo_core::separation::SupportReport)>> {
        let feet = set.boundary_sample(m, bases, mix(seed, 0x5)) ?;
        feet.into_par_iter()
            .enumerate()
            .map(|(i, x)| {
                let v = outward_normal(m, set, &x, mix(seed, i as u64))?;
                let h = support_hypersurface(m, set, &x, &v, &SupportOptions::default())?;
                let t_x = tube_radius(m, &x, None)?.t_x;
                let reach = h.radius.min(t_x);
                let ts: Vec<f64> = (1..=5).map(|k| k as f64 / 6.0 * reach).collect();
                let r = verify_support(m, set, &h, &ts, n, 0.5 * h.radius, mix(seed, 100 + i as u64))?;
                Ok((x, h.radius, r))
            })
            .collect()
    };
    let results = match run() {
        Ok(r) => r,
        Err(e) => {
            return vec![
                Check::errored("support_ray_equality", "separation", &e),
                Check::errored("support_one_sided", "separation", &e),
            ]
        }
    };
    let mut ray_err = 0.0f64;
    let mut ray_samples = Vec::new();
    let mut ray_bad = None;
    let mut worst_frac = 1.0f64;
    let mut max_violation = f64::NEG_INFINITY;
    let mut side_bad = None;
    for (i, (x, _, r)) in results.iter().enumerate() {
        for ray in &r.rays {
            let e = (ray.d_h - ray.d_s).abs();
            ray_err = ray_err.max(e);
            ray_samples.push(Sample { params: vec![i as f64, ray.t], value: e });
            if !ray.pass && ray_bad.is_none() {
                ray_bad = Some(json!({ "base": point_json(x), "ray": ray }));
            }
        }
        worst_frac = worst_frac.min(r.strict_fraction());
        max_violation = max_violation.max(r.max_violation);
        if (r.max_violation > 1e-7 || r.strict_fraction() < 0.95) && side_bad.is_none() {
            side_bad = Some(json!({ "base": point_json(x), "max_violation": r.max_violation, "strict_fraction": r.strict_fraction() }));
        }
    }
    let mut eq = Check::new("support_ray_equality", "separation", ray_bad.is_none(), ray_err, 1e-5, "max |d_H − d_S| on the normal ray, feet at x*")
        .with_samples(ray_samples);
    if let Some(w) = ray_bad {
        eq = eq.with_witness(w);
    }
    let mut side = Check::new("support_one_sided", "separation", side_bad.is_none(), worst_frac, 0.95, "d_H ≤ d_S + 1e-7 on U_x; worst strict fraction ≥ 0.95")
        .with_samples(results.iter().enumerate().map(|(i, (_, _, r))| Sample { params: vec![i as f64], value: r.strict_fraction() }).collect());
    side = side.with_witness(side_bad.unwrap_or_else(|| json!({ "max_violation": max_violation })));
    vec![eq, side]
}

/// `h_x` on `n` boundary samples: positive above `floor`, matching `oracle`
/// within 1e-3, and equal to the tangential Hessian of the signed distance.
pub fn second_fundamental_form_checks(
    m: &Manifold,
    set: &Arc<ConvexSet>,
    n: usize,
    seed: u64,
    floor: f64,
    oracle: Option<&(dyn Fn(&Manifold, &Point) -> f64 + Sync)>,
) -> Vec<Check> {
    let run = || -> Result<Vec<(Point, f64, f64)>> {
        let sdf = SignedDistanceField::new(m, set.clone())?;
        let field = sdf.as_field();
        set.boundary_sample(m, n, mix(seed, 0x4))?
            .into_par_iter()
            .map(|x| {
                let h = second_fundamental_form(m, &sdf, &x)?;
                let hess = m.hessian_with_step(&field, &x, 1e-3)?;
                let mut gap = 0.0f64;
                for (a, u) in h.tangent_basis.iter().enumerate() {
                    for (b, w) in h.tangent_basis.iter().enumerate() {
                        gap = gap.max((hess.eval(u, w) - h.matrix[(a, b)]).abs());
                    }
                }
                Ok((x, h.min_eigenvalue(), gap))
            })
            .collect()
    };
    let rows = match run() {
        Ok(r) => r,
        Err(e) => return vec![Check::errored("second_fundamental_form_positive", "convexity_lab", e)],
    };
    let min_h = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let argmin = rows.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map(|r| point_json(&r.0));
    let samples: Vec<Sample> = rows.iter().enumerate().map(|(i, r)| Sample { params: vec![i as f64], value: r.1 }).collect();
    let mut out = vec![Check::new("second_fundamental_form_positive", "convexity_lab", min_h > floor, min_h, floor, "min h_x > tolerance")
        .with_samples(samples)
        .with_witness(json!({ "argmin": argmin }))];
    let gap = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    out.push(Check::new("signed_distance_hessian_is_h", "convexity_lab", gap <= 1e-3, gap, 1e-3, "max |d²φ − h_x| on T_xW")
        .with_samples(rows.iter().enumerate().map(|(i, r)| Sample { params: vec![i as f64], value: r.2 }).collect()));
    if let Some(oracle) = oracle {
        let errs: Vec<f64> = rows.iter().map(|r| (r.1 - oracle(m, &r.0)).abs()).collect();
        let worst = errs.iter().copied().fold(0.0, f64::max);
        out.push(Check::new("second_fundamental_form_oracle", "convexity_lab", worst <= 1e-3, worst, 1e-3, "max |h_x − closed form|")
            .with_samples(errs.iter().enumerate().map(|(i, e)| Sample { params: vec![i as f64], value: *e }).collect()));
    }
    out
}

/// `convexity_report` for `d_S` on geodesics in the 0.3·t_x tube.
/// With `expect_convex = false` the check passes when a violation is found.
pub fn distance_convexity(m: &Manifold, set: &Arc<ConvexSet>, n: usize, seed: u64, expect_convex: bool) -> Check {
    let name = if expect_convex { "distance_convex_near_set" } else { "distance_convexity_refuted" };
    let region = ReportRegion::Tube { set: set.clone(), fraction: 0.3, epsilon: None };
    let opts = ReportOptions { n_geodesics: n, seed, ..ReportOptions::default() };
    let r = match convexity_report(m, &ReportTarget::Distance(set.clone()), &region, &opts) {
        Ok(r) => r,
        Err(e) => return Check::errored(name, "convexity_lab", e),
    };
    let tol = r.tolerance;
    let ok = if expect_convex { r.pass && r.n_geodesics == n } else { !r.pass && r.worst.is_some() };
    let samples = r
        .profiles
        .iter()
        .map(|p| Sample { params: vec![p.id as f64], value: p.second_differences.iter().copied().fold(f64::INFINITY, f64::min) })
        .collect();
    let criterion = if expect_convex { "min second difference ≥ −tol·(1+|g|) on every geodesic" } else { "some second difference below −tol·(1+|g|)" };
    let mut c = Check::new(name, "convexity_lab", ok, r.min_second_difference, -tol, criterion).with_samples(samples);
    let summary = json!({ "geodesics": r.n_geodesics, "min_h": r.min_h, "asserted": r.asserted, "step": r.step });
    c = match &r.worst {
        Some(w) => c.with_witness(json!({ "summary": summary, "worst": w })),
        None => c.with_witness(json!({ "summary": summary })),
    };
    c
}
