//! Spherical cap `{z ≥ 1/2}` around the north pole.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};

use proxgeo_core::{Manifold, Point};
use serde_json::json;

use super::{mix, point_json, suite, Ctx, Scenario};
use crate::config::{ManifoldConfig, PointConfig, SetConfig};
use crate::report::Check;

pub const SCENARIO: Scenario = Scenario {
    name: "example_sphere_cap",
    summary: "cap of radius π/3 on the unit sphere: cones, tube, separation, h_x and convexity of d_S",
    modules: &["convex_sets", "proximal_cone", "tubular", "separation", "convexity_lab"],
    manifold: || ManifoldConfig::Sphere,
    set: || Some(SetConfig::Ball { center: PointConfig::Embedding { embedding: vec![0.0, 0.0, 1.0] }, radius: FRAC_PI_3 }),
    run,
};

fn cap_h(_: &Manifold, _: &Point) -> f64 {
    // Geodesic curvature of the circle of radius π/3: cot(π/3).
    1.0 / 3f64.sqrt()
}

fn run(ctx: &Ctx) -> Vec<Check> {
    let (m, set, n) = (&ctx.m, ctx.set(), &ctx.counts);
    let mut checks = Vec::new();
    if ctx.stock {
        checks.push(projection_oracle(m, set));
    }
    checks.push(local_convexity(m, set, ctx.seed));
    checks.push(suite::cone_equivalence(m, set, n.cone_pairs, mix(ctx.seed, 1)));
    checks.push(suite::tube_uniqueness(m, set, n.tube_points, mix(ctx.seed, 2)));
    checks.extend(suite::support(m, set, 5, n.support_samples, mix(ctx.seed, 3)));
    let oracle: Option<&(dyn Fn(&Manifold, &Point) -> f64 + Sync)> = if ctx.stock { Some(&cap_h) } else { None };
    checks.extend(suite::second_fundamental_form_checks(m, set, n.boundary_points, mix(ctx.seed, 4), 0.5, oracle));
    checks.push(suite::distance_convexity(m, set, n.geodesics, mix(ctx.seed, 5), true));
    checks
}

/// `d_S((1,0,0)) = π/6` with the foot on the boundary circle at longitude 0.
fn projection_oracle(m: &Manifold, set: &proxgeo_core::ConvexSet) -> Check {
    const NAME: &str = "projection_matches_closed_form";
    let run = || -> proxgeo_core::Result<(f64, Point)> {
        let x = m.point_from_embedding(&[1.0, 0.0, 0.0])?;
        let r = set.project(m, &x)?;
        Ok((r.value, r.minimizers[0].clone()))
    };
    match run() {
        Ok((d, foot)) => {
            let e = m.embed(&foot).unwrap_or_default();
            let expected = [FRAC_PI_3.sin(), 0.0, 0.5];
            let foot_err = (0..3).map(|k| (e[k] - expected[k]).abs()).fold(0.0, f64::max);
            let err = (d - FRAC_PI_6).abs().max(foot_err);
            Check::new(NAME, "convex_sets", err <= 2e-4, err, 2e-4, "|d_S − π/6| and foot error")
                .with_witness(json!({ "value": d, "foot": point_json(&foot) }))
        }
        Err(e) => Check::errored(NAME, "convex_sets", e),
    }
}

fn local_convexity(m: &Manifold, set: &proxgeo_core::ConvexSet, seed: u64) -> Check {
    const NAME: &str = "locally_convex_at_boundary";
    let run = || -> proxgeo_core::Result<(bool, f64)> {
        let mut worst = 0.0f64;
        let mut pass = true;
        for (i, x) in set.boundary_sample(m, 4, mix(seed, 0x1c))?.iter().enumerate() {
            let r = set.local_convexity_check(m, x, 0.3, 100, mix(seed, i as u64))?;
            pass &= r.pass;
            worst = worst.max(r.max_violation);
        }
        Ok((pass, worst))
    };
    match run() {
        Ok((pass, worst)) => Check::new(NAME, "convex_sets", pass, worst, 1e-7, "dyadic midpoints stay in S"),
        Err(e) => Check::errored(NAME, "convex_sets", e),
    }
}
