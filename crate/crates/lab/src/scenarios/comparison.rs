//! Spherical law of cosines as the comparison residual on `S²` and `H²`.

use std::f64::consts::{PI, TAU};

use proxgeo_core::{Manifold, Point, Result, TangentVector};
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{mix, point_json, sphere_point, Ctx, Scenario};
use crate::config::ManifoldConfig;
use crate::report::{Check, Sample};

pub const SCENARIO: Scenario = Scenario {
    name: "comparison_lemma_sweep",
    summary: "triangle comparison residual with δ = 1 on S² (zero) and on H² (positive)",
    modules: &["manifold_core"],
    manifold: || ManifoldConfig::Sphere,
    set: || None,
    run,
};

const RADIUS: f64 = 0.7;

/// Vertex `exp_c(r u)` with `r ≤ RADIUS` and a uniform direction.
fn vertex(m: &Manifold, c: &Point, rng: &mut proxgeo_core::Rng) -> Result<Point> {
    let frame = m.orthonormal_frame(c, None);
    let a = TAU * rng.random::<f64>();
    let r = RADIUS * rng.random::<f64>().sqrt();
    let w = frame.column(0) * (r * a.cos()) + frame.column(1) * (r * a.sin());
    m.exp(&TangentVector::new(c.clone(), w))
}

/// Draws a nondegenerate triangle and its residual, retrying degenerate ones.
fn triangle(m: &Manifold, center: &dyn Fn(&mut proxgeo_core::Rng) -> Result<Point>, delta: f64, seed: u64) -> Result<([Point; 3], f64)> {
    let mut rng = proxgeo_core::rng_from_seed(seed);
    let mut last = None;
    for _ in 0..20 {
        let c = center(&mut rng)?;
        let p = [vertex(m, &c, &mut rng)?, vertex(m, &c, &mut rng)?, vertex(m, &c, &mut rng)?];
        match m.triangle_comparison(&p[0], &p[1], &p[2], delta) {
            Ok((_, rho)) => return Ok((p, rho)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn run(ctx: &Ctx) -> Vec<Check> {
    let mut checks = vec![sphere_sweep(&ctx.m, ctx.counts.triangles, mix(ctx.seed, 0))];
    if ctx.stock {
        checks.push(hyperbolic_control(ctx.counts.triangles.min(200), mix(ctx.seed, 1)));
    }
    checks
}

/// `ρ ≥ −1e-9` and `|ρ| ≤ 1e-6` on `n` triangles of diameter ≤ 1.4.
pub fn sphere_sweep(m: &Manifold, n: usize, seed: u64) -> Check {
    const NAME: &str = "sphere_residual_vanishes";
    let center = |rng: &mut proxgeo_core::Rng| sphere_point(m, (2.0 * rng.random::<f64>() - 1.0) * 1.2, PI * (2.0 * rng.random::<f64>() - 1.0));
    let rows: Result<Vec<_>> = (0..n).into_par_iter().map(|i| triangle(m, &center, 1.0, mix(seed, i as u64))).collect();
    let rows = match rows {
        Ok(r) => r,
        Err(e) => return Check::errored(NAME, "manifold_core", e),
    };
    let worst = rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    let bad = rows.iter().find(|r| !(r.1 >= -1e-9 && r.1.abs() <= 1e-6));
    let samples = rows.iter().enumerate().map(|(i, r)| Sample { params: vec![i as f64], value: r.1 }).collect();
    let mut c = Check::new(NAME, "manifold_core", bad.is_none(), worst, 1e-6, "ρ ≥ −1e-9 and |ρ| ≤ 1e-6 for every triangle").with_samples(samples);
    if let Some((p, rho)) = bad {
        c = c.with_witness(json!({ "vertices": p.iter().map(point_json).collect::<Vec<_>>(), "rho": rho }));
    }
    c
}

/// Under curvature −1 the same residual is strictly positive.
fn hyperbolic_control(n: usize, seed: u64) -> Check {
    const NAME: &str = "hyperbolic_residual_positive";
    let m = Manifold::hyperbolic();
    let center = |rng: &mut proxgeo_core::Rng| Ok(Point::new(0, &[rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5]));
    let rows: Result<Vec<_>> = (0..n).into_par_iter().map(|i| triangle(&m, &center, 1.0, mix(seed, i as u64))).collect();
    let rows = match rows {
        Ok(r) => r,
        Err(e) => return Check::errored(NAME, "manifold_core", e),
    };
    let min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let bad = rows.iter().find(|r| !(r.1 > 0.0));
    let samples = rows.iter().enumerate().map(|(i, r)| Sample { params: vec![i as f64], value: r.1 }).collect();
    let mut c = Check::new(NAME, "manifold_core", bad.is_none(), min, 0.0, "ρ > 0 for every triangle").with_samples(samples);
    if let Some((p, rho)) = bad {
        c = c.with_witness(json!({ "vertices": p.iter().map(point_json).collect::<Vec<_>>(), "rho": rho }));
    }
    c
}
