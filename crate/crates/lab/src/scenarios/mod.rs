//! Named scenarios and the runner.

use std::sync::Arc;

use proxgeo_core::{ConvexSet, Manifold, Point, ToleranceProfile};
use serde_json::{json, Value};

use crate::config::{ConfigError, ExperimentConfig, ManifoldConfig, SampleCounts, SetConfig};
use crate::report::{Check, Report};

mod arc;
mod backbone;
mod cap;
mod comparison;
mod hadamard;
mod paraboloid;
mod superjet;
pub mod suite;

pub const DEFAULT_SEED: u64 = 7;

/// Resolved inputs of one run.
pub struct Ctx {
    pub m: Manifold,
    pub set: Option<Arc<ConvexSet>>,
    pub seed: u64,
    pub counts: Counts,
    /// Manifold and set are the scenario defaults, so closed-form oracles apply.
    pub stock: bool,
}

impl Ctx {
    pub fn set(&self) -> &Arc<ConvexSet> {
        self.set.as_ref().expect("scenario declares a set")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Counts {
    pub cone_pairs: usize,
    pub tube_points: usize,
    pub support_samples: usize,
    pub geodesics: usize,
    pub boundary_points: usize,
    pub hessian_points: usize,
    pub triangles: usize,
    pub jet_points: usize,
    pub backbone_cases: usize,
}

impl Default for Counts {
    fn default() -> Self {
        Self {
            cone_pairs: 200,
            tube_points: 200,
            support_samples: 200,
            geodesics: 500,
            boundary_points: 30,
            hessian_points: 20,
            triangles: 1000,
            jet_points: 50,
            backbone_cases: 500,
        }
    }
}

impl Counts {
    fn with(mut self, s: &SampleCounts) -> Self {
        let pick = |o: Option<usize>, d: &mut usize| {
            if let Some(v) = o {
                *d = v;
            }
        };
        pick(s.cone_pairs, &mut self.cone_pairs);
        pick(s.tube_points, &mut self.tube_points);
        pick(s.support_samples, &mut self.support_samples);
        pick(s.geodesics, &mut self.geodesics);
        pick(s.boundary_points, &mut self.boundary_points);
        pick(s.hessian_points, &mut self.hessian_points);
        pick(s.triangles, &mut self.triangles);
        pick(s.jet_points, &mut self.jet_points);
        pick(s.backbone_cases, &mut self.backbone_cases);
        self
    }
}

pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    /// Modules whose properties the scenario exercises.
    pub modules: &'static [&'static str],
    pub manifold: fn() -> ManifoldConfig,
    pub set: fn() -> Option<SetConfig>,
    run: fn(&Ctx) -> Vec<Check>,
}

pub fn scenarios() -> &'static [Scenario] {
    &SCENARIOS
}

static SCENARIOS: [Scenario; 7] = [
    cap::SCENARIO,
    paraboloid::SCENARIO,
    arc::SCENARIO,
    hadamard::SCENARIO,
    comparison::SCENARIO,
    superjet::SCENARIO,
    backbone::SCENARIO,
];

pub fn find(name: &str) -> Result<&'static Scenario, ConfigError> {
    SCENARIOS.iter().find(|s| s.name == name).ok_or_else(|| ConfigError::UnknownScenario(name.into()))
}

/// Module → scenarios that exercise it.
pub fn coverage_map() -> Vec<(&'static str, Vec<&'static str>)> {
    let mut modules: Vec<&'static str> = SCENARIOS.iter().flat_map(|s| s.modules.iter().copied()).collect();
    modules.sort_unstable();
    modules.dedup();
    modules
        .into_iter()
        .map(|m| (m, SCENARIOS.iter().filter(|s| s.modules.contains(&m)).map(|s| s.name).collect()))
        .collect()
}

pub fn coverage_json() -> Value {
    let map: serde_json::Map<String, Value> =
        coverage_map().into_iter().map(|(m, s)| (m.to_string(), json!(s))).collect();
    Value::Object(map)
}

/// Validates `cfg` against `scenario` and builds the run context.
pub fn prepare(scenario: &Scenario, cfg: &ExperimentConfig) -> Result<(Ctx, Value), ConfigError> {
    if let Some(name) = &cfg.scenario {
        if name != scenario.name {
            return Err(ConfigError::invalid("scenario", format!("config is for `{name}`, not `{}`", scenario.name)));
        }
    }
    let tol = cfg.tolerances.clone().unwrap_or_default();
    validate_tolerances(&tol)?;
    let mcfg = cfg.manifold.clone().unwrap_or_else(scenario.manifold);
    let m = mcfg.build(&tol)?;
    let scfg = match (&cfg.set, (scenario.set)()) {
        (Some(_), None) => return Err(ConfigError::invalid("set", "this scenario takes no set")),
        (Some(s), Some(_)) => Some(s.clone()),
        (None, d) => d,
    };
    let set = scfg.as_ref().map(|s| s.build(&m)).transpose()?;
    let counts = Counts::default().with(&cfg.samples);
    let setup = json!({
        "manifold": mcfg,
        "set": scfg,
        "samples": counts,
        "tolerances": cfg.tolerances.is_some().then_some(&tol),
    });
    let stock = cfg.manifold.is_none() && cfg.set.is_none();
    Ok((Ctx { m, set, seed: cfg.seed.unwrap_or(DEFAULT_SEED), counts, stock }, setup))
}

fn validate_tolerances(t: &ToleranceProfile) -> Result<(), ConfigError> {
    let positive = [
        ("ode_tol", t.ode_tol),
        ("fd_christoffel_step", t.fd_christoffel_step),
        ("fd_curvature_step", t.fd_curvature_step),
        ("fd_gradient_step", t.fd_gradient_step),
        ("fd_hessian_step", t.fd_hessian_step),
        ("log_residual", t.log_residual),
        ("second_diff_step", t.second_diff_step),
        ("second_diff_tol", t.second_diff_tol),
        ("jet_tol", t.jet_tol),
    ];
    for (name, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ConfigError::invalid(&format!("tolerances.{name}"), "must be positive and finite"));
        }
    }
    Ok(())
}

pub fn run(scenario: &Scenario, ctx: &Ctx, setup: Value) -> Report {
    let checks = (scenario.run)(ctx);
    Report::new(scenario.name, ctx.seed, setup, checks)
}

/// Convenience: default config with a seed.
pub fn run_default(name: &str, seed: u64) -> Result<Report, ConfigError> {
    let sc = find(name)?;
    let cfg = ExperimentConfig { seed: Some(seed), ..ExperimentConfig::default() };
    let (ctx, setup) = prepare(sc, &cfg)?;
    Ok(run(sc, &ctx, setup))
}

/// SplitMix64 step; decorrelates per-sample seeds.
pub fn mix(seed: u64, i: u64) -> u64 {
    let mut z = seed ^ i.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn point_json(p: &Point) -> Value {
    json!({ "chart": p.chart, "coords": p.coords.as_slice() })
}

pub(crate) fn sphere_point(m: &Manifold, lat: f64, lon: f64) -> proxgeo_core::Result<Point> {
    m.point_from_embedding(&[lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()])
}

/// Tangent vector at `p` from an ambient vector (least squares through the embedding).
pub(crate) fn from_ambient(m: &Manifold, p: &Point, e: &[f64]) -> proxgeo_core::Result<proxgeo_core::TangentVector> {
    let j = m.embedding_jacobian(p).ok_or(proxgeo_core::GeoError::InvalidInput("no embedding".into()))?;
    let e = nalgebra::DVector::from_column_slice(e);
    let a = (j.transpose() * &j)
        .cholesky()
        .ok_or(proxgeo_core::GeoError::InvalidInput("singular embedding".into()))?
        .solve(&(j.transpose() * e));
    Ok(proxgeo_core::TangentVector::new(p.clone(), a))
}

/// Comparison residual on `n` triangles in unit-sphere balls of radius 0.7.
pub fn comparison_sphere_sweep(n: usize, seed: u64) -> Check {
    comparison::sphere_sweep(&Manifold::sphere(), n, seed)
}
