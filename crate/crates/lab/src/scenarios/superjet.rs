//! Second-order superjets: soundness on convex fields and the touching certificate.

use nalgebra::{DMatrix, DVector};
use proxgeo_core::superjets::{superjet_positivity, JetElement, PositivityReport};
use proxgeo_core::{Manifold, Point, ScalarField};
use rayon::prelude::*;
use serde_json::json;

use super::{arc, mix, point_json, sphere_point, Ctx, Scenario};
use crate::config::ManifoldConfig;
use crate::report::{Check, Sample};

pub const SCENARIO: Scenario = Scenario {
    name: "superjet_suite",
    summary: "superjet positivity for convex fields, a concave control and the non-convexity certificate",
    modules: &["superjets"],
    manifold: || ManifoldConfig::Sphere,
    set: || None,
    run,
};

const CHUNKS: usize = 10;

fn run(ctx: &Ctx) -> Vec<Check> {
    let m = &ctx.m;
    let n = ctx.counts.jet_points;
    let mut checks = Vec::new();
    match sphere_point(m, 0.4, 0.2) {
        Ok(p) => {
            let d2 = ScalarField::SquaredDistance(p.clone());
            checks.push(positivity("positivity_squared_distance", m, &d2, &p, 0.3, n, mix(ctx.seed, 0), true));
            let concave = d2.scaled(-1.0);
            checks.push(positivity("positivity_refuted_for_concave", m, &concave, &p, 0.3, n.min(10), mix(ctx.seed, 1), false));
        }
        Err(e) => checks.push(Check::errored("positivity_squared_distance", "superjets", e)),
    }
    if ctx.stock {
        let e = Manifold::euclidean(2);
        let f = ScalarField::ChartQuadratic { chart: 0, q: DMatrix::identity(2, 2), b: DVector::zeros(2), c: 0.0 };
        let o = Point::new(0, &[0.2, -0.1]);
        checks.push(positivity("positivity_euclidean_quadratic", &e, &f, &o, 0.5, n.min(20), mix(ctx.seed, 2), true));
        checks.push(arc::bump_certificate(m));
    }
    checks
}

/// Probes `n` points of `B(center, radius)` split over fixed chunks so the
/// result does not depend on the worker count.
pub fn positivity(name: &str, m: &Manifold, f: &ScalarField, center: &Point, radius: f64, n: usize, seed: u64, expect: bool) -> Check {
    let sizes: Vec<usize> = (0..CHUNKS).map(|i| n / CHUNKS + usize::from(i < n % CHUNKS)).filter(|s| *s > 0).collect();
    let parts: proxgeo_core::Result<Vec<PositivityReport>> = sizes
        .par_iter()
        .enumerate()
        .map(|(i, &k)| superjet_positivity(m, f, center, radius, k, mix(seed, i as u64)))
        .collect();
    let parts = match parts {
        Ok(p) => p,
        Err(e) => return Check::errored(name, "superjets", e),
    };
    let accepted: usize = parts.iter().map(|p| p.accepted).sum();
    let min_eig = parts.iter().map(|p| p.min_eig).fold(f64::INFINITY, f64::min);
    let sound = parts.iter().all(|p| p.pass);
    let witness = parts.iter().filter_map(|p| p.witness.as_ref()).min_by(|a, b| a.min_eig.total_cmp(&b.min_eig));
    let samples = parts.iter().enumerate().map(|(i, p)| Sample { params: vec![i as f64], value: p.min_eig }).collect();
    let ok = accepted > 0 && sound == expect;
    let criterion = if expect { "min eig ≥ −1e-6 over every accepted jet" } else { "some accepted jet has min eig < −1e-6" };
    let mut c = Check::new(name, "superjets", ok, min_eig, -1e-6, criterion).with_samples(samples);
    c = match witness {
        Some(j) => c.with_witness(jet_json(j, accepted)),
        None => c.with_witness(json!({ "accepted": accepted, "points": n })),
    };
    c
}

fn jet_json(j: &JetElement, accepted: usize) -> serde_json::Value {
    json!({
        "accepted": accepted,
        "point": point_json(&j.point),
        "xi": j.xi.as_slice(),
        "hessian": j.hessian.matrix.as_slice(),
        "family": j.family,
        "min_eig": j.min_eig,
        "max_excess": j.max_excess,
    })
}
