//! Ball in the hyperbolic plane: no curvature limit on any radius.

use proxgeo_core::convexity::{convexity_report, ReportOptions, ReportRegion, ReportTarget};
use proxgeo_core::separation::{support_hypersurface, SupportOptions};
use proxgeo_core::tubular::tube_radius;
use proxgeo_core::{CurvatureBound, Manifold, Point};
use serde_json::json;

use super::{mix, point_json, suite, Ctx, Scenario};
use crate::config::{ManifoldConfig, PointConfig, SetConfig};
use crate::report::{Check, Sample};

pub const SCENARIO: Scenario = Scenario {
    name: "hadamard_sanity",
    summary: "ball of radius 1/2 in H²: radii set by ε alone, separation, tube, global convexity of d_S",
    modules: &["manifold_core", "tubular", "separation", "convexity_lab"],
    manifold: || ManifoldConfig::Hyperbolic,
    set: || Some(SetConfig::Ball { center: PointConfig::Chart { chart: 0, coords: vec![0.0, 0.0] }, radius: 0.5 }),
    run,
};

fn run(ctx: &Ctx) -> Vec<Check> {
    let (m, set, n) = (&ctx.m, ctx.set(), &ctx.counts);
    let mut checks = radii(ctx);
    checks.push(suite::tube_uniqueness(m, set, n.tube_points, mix(ctx.seed, 2)));
    checks.extend(suite::support(m, set, 5, n.support_samples, mix(ctx.seed, 3)));
    checks.push(suite::distance_convexity(m, set, n.geodesics, mix(ctx.seed, 5), true));
    if ctx.stock {
        checks.push(global_convexity(m, ctx));
    }
    checks
}

/// Non-positive curvature bound, `t_x = ε/2` and support radius `ε/2` at boundary samples.
fn radii(ctx: &Ctx) -> Vec<Check> {
    let (m, set) = (&ctx.m, ctx.set());
    let run = || -> proxgeo_core::Result<Vec<(Point, bool, f64, f64)>> {
        let mut rows = Vec::new();
        for (i, x) in set.boundary_sample(m, 8, mix(ctx.seed, 0x8))?.into_iter().enumerate() {
            let tr = tube_radius(m, &x, None)?;
            let v = suite::outward_normal(m, set, &x, mix(ctx.seed, i as u64))?;
            let h = support_hypersurface(m, set, &x, &v, &SupportOptions::default())?;
            let half = 0.5 * tr.epsilon;
            rows.push((x, tr.delta == CurvatureBound::NonPositive, (tr.t_x - half).abs(), (h.radius - half).abs()));
        }
        Ok(rows)
    };
    let rows = match run() {
        Ok(r) => r,
        Err(e) => return vec![Check::errored("curvature_bound_nonpositive", "manifold_core", e)],
    };
    let bad_curv = rows.iter().find(|r| !r.1).map(|r| json!({ "point": point_json(&r.0) }));
    let t_err = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let h_err = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let n_pos = rows.iter().filter(|r| !r.1).count();
    let mut curv = Check::new("curvature_bound_nonpositive", "manifold_core", bad_curv.is_none(), n_pos as f64, 0.0, "no positive curvature bound near bd S");
    if let Some(w) = bad_curv {
        curv = curv.with_witness(w);
    }
    let samples = |k: usize| rows.iter().enumerate().map(|(i, r)| Sample { params: vec![i as f64], value: if k == 2 { r.2 } else { r.3 } }).collect();
    vec![
        curv,
        Check::new("tube_radius_is_half_epsilon", "tubular", t_err <= 1e-12, t_err, 1e-12, "|t_x − ε/2|").with_samples(samples(2)),
        Check::new("support_radius_is_half_epsilon", "separation", h_err <= 1e-12, h_err, 1e-12, "|r − ε/2|").with_samples(samples(3)),
    ]
}

/// `d_S` is convex on the whole ball `B(o, 2.5)`, not only near `S`.
fn global_convexity(m: &Manifold, ctx: &Ctx) -> Check {
    const NAME: &str = "distance_convex_far_from_set";
    // Distances reach 3 here; a longer step keeps log-map noise out of the second differences.
    let mut m = m.clone();
    m.tol.second_diff_step = 0.05;
    let region = ReportRegion::Ball { center: Point::new(0, &[0.0, 0.0]), radius: 2.5 };
    let opts = ReportOptions { n_geodesics: ctx.counts.geodesics.min(100), seed: mix(ctx.seed, 6), ..ReportOptions::default() };
    match convexity_report(&m, &ReportTarget::Distance(ctx.set().clone()), &region, &opts) {
        Ok(r) => {
            let mut c = Check::new(NAME, "convexity_lab", r.pass, r.min_second_difference, -r.tolerance, "min second difference ≥ −tol·(1+|g|) in B(o, 2.5)");
            if let Some(w) = &r.worst {
                c = c.with_witness(json!({ "worst": w }));
            }
            c
        }
        Err(e) => Check::errored(NAME, "convexity_lab", e),
    }
}
