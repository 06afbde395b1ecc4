//! Paraboloid `z = x² + y²` and its sublevel set `{z ≤ 1/2}`.

use nalgebra::{DMatrix, DVector};
use proxgeo_core::{Manifold, Point, ScalarField};
use rand::Rng;
use serde_json::json;

use super::{mix, suite, Ctx, Scenario};
use crate::config::{FieldConfig, ManifoldConfig, PointConfig, RegionConfig, SetConfig};
use crate::report::{Check, Sample};

pub const SCENARIO: Scenario = Scenario {
    name: "example_paraboloid",
    summary: "sublevel {z ≤ 1/2} on the paraboloid: Hessian of s², cones, tube, separation, h_x and convexity of d_S",
    modules: &["manifold_core", "proximal_cone", "tubular", "separation", "convexity_lab"],
    manifold: || ManifoldConfig::Paraboloid,
    set: || {
        Some(SetConfig::Sublevel {
            field: FieldConfig::EmbeddingCoordinate { index: 2 },
            level: 0.5,
            region: RegionConfig { center: PointConfig::Chart { chart: 0, coords: vec![0.0, 0.0] }, radius: 2.0 },
        })
    },
    run,
};

/// Geodesic curvature of the parallel `s` on `z = s²`.
fn parallel_h(m: &Manifold, x: &Point) -> f64 {
    let e = m.embed(x).unwrap_or_default();
    let s = (e[0] * e[0] + e[1] * e[1]).sqrt();
    1.0 / (s * (1.0 + 4.0 * s * s).sqrt())
}

fn run(ctx: &Ctx) -> Vec<Check> {
    let (m, set, n) = (&ctx.m, ctx.set(), &ctx.counts);
    let mut checks = Vec::new();
    if ctx.stock {
        checks.push(polar_hessian(m, n.hessian_points, mix(ctx.seed, 0)));
    }
    checks.push(suite::cone_equivalence(m, set, n.cone_pairs, mix(ctx.seed, 1)));
    checks.push(suite::tube_uniqueness(m, set, n.tube_points, mix(ctx.seed, 2)));
    checks.extend(suite::support(m, set, 5, n.support_samples, mix(ctx.seed, 3)));
    let oracle: Option<&(dyn Fn(&Manifold, &Point) -> f64 + Sync)> = if ctx.stock { Some(&parallel_h) } else { None };
    checks.extend(suite::second_fundamental_form_checks(m, set, n.boundary_points, mix(ctx.seed, 4), 0.5, oracle));
    checks.push(suite::distance_convexity(m, set, n.geodesics, mix(ctx.seed, 5), true));
    checks
}

/// Hessian of `f(s, θ) = s²` in the polar chart against
/// `diag(2/(1+4s²), 2s²/(1+4s²))`.
pub fn polar_hessian(m: &Manifold, n: usize, seed: u64) -> Check {
    const NAME: &str = "polar_hessian_of_s_squared";
    let f = ScalarField::ChartQuadratic {
        chart: 1,
        q: DMatrix::from_diagonal(&DVector::from_column_slice(&[2.0, 0.0])),
        b: DVector::zeros(2),
        c: 0.0,
    };
    let mut rng = proxgeo_core::rng_from_seed(seed);
    let mut samples = Vec::with_capacity(n);
    let mut worst = (0.0f64, json!(null));
    for _ in 0..n {
        let s = 0.1 + 0.9 * rng.random::<f64>();
        let theta = std::f64::consts::TAU * rng.random::<f64>() - std::f64::consts::PI;
        let h = match m.hessian(&f, &Point::new(1, &[s, theta])) {
            Ok(h) => h,
            Err(e) => return Check::errored(NAME, "manifold_core", e),
        };
        let d = 1.0 + 4.0 * s * s;
        let expected = DMatrix::from_diagonal(&DVector::from_column_slice(&[2.0 / d, 2.0 * s * s / d]));
        let err = (&h.matrix - expected).amax();
        samples.push(Sample { params: vec![s, theta], value: err });
        if err > worst.0 {
            worst = (err, json!({ "s": s, "theta": theta, "hessian": h.matrix.as_slice() }));
        }
    }
    Check::new(NAME, "manifold_core", worst.0 <= 1e-4, worst.0, 1e-4, "max entry error against the closed form")
        .with_samples(samples)
        .with_witness(worst.1)
}
