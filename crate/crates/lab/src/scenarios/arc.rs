//! `S` an equator arc: `d_S` is not convex near `S`.

use std::f64::consts::FRAC_PI_2;

use proxgeo_core::convexity::{concavity_witness, WitnessOptions};
use proxgeo_core::superjets::{nonconvexity_certificate, CertificateOptions, NonconvexityCertificate};
use proxgeo_core::{ConvexSet, GeodesicPath, Manifold, ScalarField};
use serde_json::json;

use super::{from_ambient, mix, point_json, sphere_point, suite, Ctx, Scenario};
use crate::config::{ManifoldConfig, PointConfig, SetConfig};
use crate::report::{Check, Sample};

pub const SCENARIO: Scenario = Scenario {
    name: "counterexample_equator_arc",
    summary: "equator arc of length 1: concavity witness, refuted convexity, duplicate feet beyond the tube, certificates",
    modules: &["convexity_lab", "tubular", "superjets"],
    manifold: || ManifoldConfig::Sphere,
    set: || {
        let end = |lon: f64| PointConfig::Embedding { embedding: vec![lon.cos(), lon.sin(), 0.0] };
        Some(SetConfig::Segment { from: end(-0.5), to: end(0.5) })
    },
    run,
};

const LAT: f64 = 0.3;

fn run(ctx: &Ctx) -> Vec<Check> {
    let (m, set) = (&ctx.m, ctx.set());
    let mut checks = Vec::new();
    if ctx.stock {
        checks.extend(witness_checks(m, set));
        checks.push(out_of_tube_duplicate(m, set));
    }
    checks.push(suite::distance_convexity(m, set, ctx.counts.geodesics.min(100), mix(ctx.seed, 5), false));
    if ctx.stock {
        checks.push(bump_certificate(m));
        checks.push(distance_certificate(m, set));
    }
    checks
}

/// Witness at `x` on latitude 0.3 above the arc's midpoint, against
/// `d_S(α(s)) = arcsin(sin 0.3 · cos s)`.
fn witness_checks(m: &Manifold, set: &ConvexSet) -> Vec<Check> {
    let w = match sphere_point(m, LAT, 0.0).and_then(|x| concavity_witness(m, set, &x, &WitnessOptions::default())) {
        Ok(w) => w,
        Err(e) => return vec![Check::errored("concavity_witness_profile", "convexity_lab", e)],
    };
    let errs: Vec<Sample> = w
        .s
        .iter()
        .zip(&w.profile)
        .filter(|(s, _)| s.abs() <= 0.2 + 1e-12)
        .map(|(s, d)| Sample { params: vec![*s], value: (d - (LAT.sin() * s.cos()).asin()).abs() })
        .collect();
    let worst = errs.iter().map(|s| s.value).fold(0.0, f64::max);
    let d2_err = (w.second_difference + LAT.tan()).abs();
    let summary = json!({
        "foot": point_json(&w.foot),
        "first_difference": w.first_difference,
        "second_difference": w.second_difference,
        "max_second_difference": w.max_second_difference,
    });
    vec![
        Check::new("concavity_witness_profile", "convexity_lab", worst <= 1e-6, worst, 1e-6, "max |d_S(α(s)) − arcsin(sin 0.3 cos s)| on |s| ≤ 0.2")
            .with_samples(errs),
        Check::new("concavity_witness_second_difference", "convexity_lab", d2_err <= 5e-3, d2_err, 5e-3, "|D² + tan 0.3|")
            .with_witness(summary.clone()),
        Check::new("concavity_witness_strict_maximum", "convexity_lab", w.accepted(), w.second_difference, -1e-6, "critical, strict local max, concave near 0")
            .with_witness(summary),
    ]
}

/// Beyond the pole, `t = π/2 + 0.1` along the midpoint normal, both arc ends are nearest.
fn out_of_tube_duplicate(m: &Manifold, set: &ConvexSet) -> Check {
    const NAME: &str = "duplicate_feet_beyond_tube";
    let run = || -> proxgeo_core::Result<proxgeo_core::ProjectionResult> {
        let mid = sphere_point(m, 0.0, 0.0)?;
        let up = from_ambient(m, &mid, &[0.0, 0.0, 1.0])?;
        let y = m.exp(&up.scaled(FRAC_PI_2 + 0.1))?;
        set.project(m, &y)
    };
    match run() {
        Ok(r) => {
            let feet: Vec<_> = r.minimizers.iter().map(point_json).collect();
            Check::new(NAME, "tubular", r.duplicate_flag, r.minimizers.len() as f64, 2.0, "duplicate_flag set")
                .with_witness(json!({ "value": r.value, "feet": feet }))
        }
        Err(e) => Check::errored(NAME, "tubular", e),
    }
}

fn equator_path(m: &Manifold, lat: f64, len: f64) -> proxgeo_core::Result<GeodesicPath> {
    let x = sphere_point(m, lat, 0.0)?;
    let east = from_ambient(m, &x, &[0.0, 1.0, 0.0])?;
    let a = m.exp(&east.scaled(-0.5 * len))?;
    let b = m.exp(&east.scaled(0.5 * len))?;
    m.geodesic_between(&a, &b, 32)
}

fn certificate_check(name: &str, cert: proxgeo_core::Result<NonconvexityCertificate>) -> Check {
    match cert {
        Ok(c) => {
            let ok = c.valid && c.boundary_margin >= -1e-7;
            Check::new(name, "superjets", ok, c.interior_distance, 1e-3, "VALID: interior distance > 1e-3, φ ≥ f on the tube boundary")
                .with_witness(certificate_json(&c))
        }
        Err(e) => Check::errored(name, "superjets", e),
    }
}

pub fn certificate_json(c: &NonconvexityCertificate) -> serde_json::Value {
    json!({
        "k": c.k, "k0": c.k0, "delta": c.delta, "c": c.c, "mu": c.mu, "mu_chart": c.mu_chart,
        "lambda0": c.lambda0, "shrunk": c.shrunk, "t0": c.t0, "x0": c.x0.as_slice(),
        "y0": point_json(&c.y0), "gradient": c.gradient.as_slice(), "hessian": c.hessian.matrix.as_slice(),
        "min_eig": c.min_eig, "alignment": c.alignment, "boundary_margin": c.boundary_margin,
        "interior_distance": c.interior_distance, "valid": c.valid,
    })
}

/// `f = −d(·, γ(1/2))²` along the arc itself violates the chord inequality.
pub fn bump_certificate(m: &Manifold) -> Check {
    let cert = equator_path(m, 0.0, 1.0).and_then(|path| {
        let mid = m.path_point(&path, 0.5 * path.t_end)?;
        let f = ScalarField::SquaredDistance(mid).scaled(-1.0);
        nonconvexity_certificate(m, &f, &path, 0.5, &CertificateOptions::default())
    });
    certificate_check("certificate_valid_for_bump", cert)
}

/// `f = d_S` along the great circle tangent to latitude 0.3.
fn distance_certificate(m: &Manifold, set: &std::sync::Arc<ConvexSet>) -> Check {
    let cert = equator_path(m, LAT, 0.6).and_then(|path| {
        let f = ScalarField::DistanceToSet(set.clone());
        // Every sample is a segment projection; a coarser grid keeps this quick.
        nonconvexity_certificate(m, &f, &path, 0.5, &CertificateOptions { grid: 1000, ..CertificateOptions::default() })
    });
    certificate_check("certificate_valid_for_distance", cert)
}
