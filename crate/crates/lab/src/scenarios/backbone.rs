//! Exp/log, transport and length–energy on the built-in surfaces.

use std::f64::consts::{PI, TAU};

use proxgeo_core::{Manifold, Point, Result, TangentVector};
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{mix, point_json, Ctx, Scenario};
use crate::config::ManifoldConfig;
use crate::report::{Check, Sample};

pub const SCENARIO: Scenario = Scenario {
    name: "numerical_backbone",
    summary: "exp/log roundtrip, parallel transport isometry and L² = span·E on R², S², H² and the paraboloid",
    modules: &["manifold_core"],
    manifold: || ManifoldConfig::Euclidean { dim: 2 },
    set: || None,
    run,
};

/// `(manifold, chart-0 box half-width, max tangent norm)`; on the sphere norms stay below `0.9·inj = 0.9π`.
pub fn models() -> Vec<(&'static str, Manifold, f64, f64)> {
    vec![
        ("euclidean", Manifold::euclidean(2), 2.0, 3.0),
        ("sphere", Manifold::sphere(), 1.0, 0.9 * PI),
        ("hyperbolic", Manifold::hyperbolic(), 0.6, 2.0),
        ("paraboloid", Manifold::paraboloid(), 0.8, 0.8),
    ]
}

fn run(ctx: &Ctx) -> Vec<Check> {
    let n = ctx.counts.backbone_cases;
    let mut checks = Vec::new();
    for (k, (name, m, r, vmax)) in models().into_iter().enumerate() {
        let seed = mix(ctx.seed, k as u64);
        checks.push(roundtrip(name, &m, r, vmax, n, seed));
        checks.push(transport(name, &m, r, vmax, n, mix(seed, 1)));
        checks.push(length_energy(name, &m, r, vmax, n, mix(seed, 2)));
    }
    checks
}

struct Draw {
    p: Point,
    v: TangentVector,
    u: f64,
    w: f64,
}

/// Base point in the box, a tangent vector of norm `≤ scale`, and two spare uniforms.
fn draw(m: &Manifold, r: f64, scale: f64, seed: u64) -> Draw {
    let mut rng = proxgeo_core::rng_from_seed(seed);
    let p = Point::new(0, &[r * (2.0 * rng.random::<f64>() - 1.0), r * (2.0 * rng.random::<f64>() - 1.0)]);
    let dir = TAU * rng.random::<f64>();
    let len = scale * rng.random::<f64>();
    let e = m.orthonormal_frame(&p, None);
    let v = TangentVector::new(p.clone(), (e.column(0) * dir.cos() + e.column(1) * dir.sin()) * len);
    Draw { p, v, u: rng.random(), w: rng.random() }
}

fn gather(name: &str, rows: Result<Vec<(Point, f64, f64)>>, tol: f64, criterion: &str) -> Check {
    let rows = match rows {
        Ok(r) => r,
        Err(e) => return Check::errored(name, "manifold_core", e),
    };
    // Each row carries (point, error, allowed error).
    let worst = rows.iter().map(|r| r.1 / r.2).fold(0.0, f64::max);
    let bad = rows.iter().find(|r| !(r.1 <= r.2));
    let samples = rows.iter().enumerate().map(|(i, r)| Sample { params: vec![i as f64], value: r.1 }).collect();
    let mut c = Check::new(name, "manifold_core", bad.is_none(), worst * tol, tol, criterion).with_samples(samples);
    if let Some((p, err, allowed)) = bad {
        c = c.with_witness(json!({ "point": point_json(p), "error": err, "allowed": allowed }));
    }
    c
}

/// `‖log_p exp_p v − v‖ ≤ 1e-6 (1 + ‖v‖)`.
pub fn roundtrip(name: &str, m: &Manifold, r: f64, vmax: f64, n: usize, seed: u64) -> Check {
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let d = draw(m, r, vmax, mix(seed, i as u64));
            let q = m.exp(&d.v)?;
            let w = m.log_map(&d.p, &q)?;
            let err = m.norm(&TangentVector::new(d.p.clone(), &w.components - &d.v.components));
            Ok((d.p, err, 1e-6 * (1.0 + m.norm(&d.v))))
        })
        .collect();
    gather(&format!("{name}_exp_log_roundtrip"), rows, 1e-6, "‖log exp v − v‖ ≤ 1e-6(1 + ‖v‖); value is the worst error relative to 1 + ‖v‖")
}

/// `|‖P w‖ − ‖w‖| ≤ 1e-7` along geodesics.
pub fn transport(name: &str, m: &Manifold, r: f64, vmax: f64, n: usize, seed: u64) -> Check {
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let d = draw(m, r, vmax, mix(seed, i as u64));
            let path = m.geodesic(&d.v, 1.0, 16)?;
            let e = m.orthonormal_frame(&d.p, None);
            let a = TAU * d.u;
            let wlen = 0.1 + 2.9 * d.w;
            let w = TangentVector::new(d.p.clone(), (e.column(0) * a.cos() + e.column(1) * a.sin()) * wlen);
            let out = m.parallel_transport(&w, &path)?;
            Ok((d.p, (m.norm(&out) - wlen).abs(), 1e-7))
        })
        .collect();
    gather(&format!("{name}_transport_isometry"), rows, 1e-7, "|‖P w‖ − ‖w‖| ≤ 1e-7")
}

/// `|L² − span·E| ≤ 1e-8 L²` for geodesics on `[0, span]`.
pub fn length_energy(name: &str, m: &Manifold, r: f64, vmax: f64, n: usize, seed: u64) -> Check {
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let d = draw(m, r, vmax, mix(seed, i as u64));
            let span = 0.5 + 1.5 * d.u;
            let v = d.v.scaled((0.05 + 0.95 * d.w) / span.max(1.0));
            let path = m.geodesic(&v, span, 64)?;
            let l2 = path.length * path.length;
            Ok((d.p, (l2 - span * path.energy).abs(), 1e-8 * l2))
        })
        .collect();
    gather(&format!("{name}_length_energy"), rows, 1e-8, "|L² − span·E| ≤ 1e-8·L²; value is the worst relative error")
}
