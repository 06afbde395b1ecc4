use proxgeo_lab::config::SampleCounts;
use proxgeo_lab::scenarios::{self, coverage_map};
use proxgeo_lab::ExperimentConfig;

fn small() -> SampleCounts {
    SampleCounts {
        cone_pairs: Some(8),
        tube_points: Some(8),
        support_samples: Some(20),
        geodesics: Some(10),
        boundary_points: Some(4),
        hessian_points: Some(5),
        triangles: Some(50),
        jet_points: Some(10),
        backbone_cases: Some(20),
    }
}

#[test]
fn every_scenario_passes_with_small_samples() {
    for s in scenarios::scenarios() {
        let cfg = ExperimentConfig { samples: small(), ..ExperimentConfig::default() };
        let (ctx, setup) = scenarios::prepare(s, &cfg).unwrap();
        let r = scenarios::run(s, &ctx, setup);
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed()).map(|c| (&c.name, c.measured, &c.witness)).collect();
        assert!(r.pass, "{}: {failed:?}", s.name);
        assert_eq!(r.seed, scenarios::DEFAULT_SEED);
    }
}

#[test]
fn coverage_spans_the_core_modules() {
    let modules: Vec<&str> = coverage_map().into_iter().map(|(m, _)| m).collect();
    assert_eq!(
        modules,
        ["convex_sets", "convexity_lab", "manifold_core", "proximal_cone", "separation", "superjets", "tubular"]
    );
    for (_, s) in coverage_map() {
        assert!(!s.is_empty());
    }
}

#[test]
fn scenario_rejects_config_for_another_scenario() {
    let s = scenarios::find("superjet_suite").unwrap();
    let cfg = ExperimentConfig { scenario: Some("hadamard_sanity".into()), ..ExperimentConfig::default() };
    assert!(scenarios::prepare(s, &cfg).is_err());
    assert!(scenarios::find("nope").is_err());
}
