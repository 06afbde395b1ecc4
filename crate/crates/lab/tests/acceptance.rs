//! Acceptance gate: ten criteria, one PASS/FAIL line each, with time limits.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use proxgeo_core::convexity::{
    concavity_witness, convexity_report, second_fundamental_form, ReportOptions, ReportRegion, ReportTarget,
    SignedDistanceField, WitnessOptions,
};
use proxgeo_core::separation::{support_hypersurface, verify_support, SupportOptions};
use proxgeo_core::sets::Region;
use proxgeo_core::superjets::{nonconvexity_certificate, superjet_positivity, CertificateOptions};
use proxgeo_core::tubular::{tube_sample, verify_projection_uniqueness};
use proxgeo_core::{ConvexSet, Manifold, Point, ScalarField, TangentVector};
use proxgeo_lab::scenarios::suite;
use proxgeo_lab::{report::Check, run_default};

type Outcome = Result<String, String>;

fn sphere_point(m: &Manifold, lat: f64, lon: f64) -> Point {
    m.point_from_embedding(&[lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]).unwrap()
}

fn from_ambient(m: &Manifold, p: &Point, e: &[f64]) -> TangentVector {
    let j = m.embedding_jacobian(p).unwrap();
    let a = (j.transpose() * &j).cholesky().unwrap().solve(&(j.transpose() * DVector::from_column_slice(e)));
    TangentVector::new(p.clone(), a)
}

fn cap(m: &Manifold) -> Arc<ConvexSet> {
    Arc::new(ConvexSet::ball(m, m.point_from_embedding(&[0.0, 0.0, 1.0]).unwrap(), FRAC_PI_3).unwrap())
}

fn paraboloid_set(m: &Manifold) -> Arc<ConvexSet> {
    let region = Region { center: Point::new(0, &[0.0, 0.0]), radius: 2.0 };
    Arc::new(ConvexSet::sublevel(m, ScalarField::EmbeddingCoordinate(2), 0.5, region).unwrap())
}

fn equator_arc(m: &Manifold) -> Arc<ConvexSet> {
    Arc::new(ConvexSet::segment(m, sphere_point(m, 0.0, -0.5), sphere_point(m, 0.0, 0.5)).unwrap())
}

fn expect(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn check_passed(c: &Check) -> Outcome {
    expect(c.passed(), format!("{} = {:.3e}", c.name, c.measured))
}

/// Hessian of `s²` in polar coordinates on the paraboloid.
fn criterion_1() -> Outcome {
    let m = Manifold::paraboloid();
    let f = ScalarField::ChartQuadratic {
        chart: 1,
        q: nalgebra::DMatrix::from_diagonal(&DVector::from_column_slice(&[2.0, 0.0])),
        b: DVector::zeros(2),
        c: 0.0,
    };
    let mut worst = 0.0f64;
    for i in 0..20 {
        let s = 0.1 + 0.9 * i as f64 / 19.0;
        let theta = -3.0 + 6.0 * ((i * 7) % 20) as f64 / 19.0;
        let h = m.hessian(&f, &Point::new(1, &[s, theta])).map_err(|e| e.to_string())?;
        let d = 1.0 + 4.0 * s * s;
        let expected = [2.0 / d, 0.0, 0.0, 2.0 * s * s / d];
        for (a, b) in h.matrix.iter().zip(expected) {
            worst = worst.max((a - b).abs());
        }
    }
    expect(worst <= 1e-4, format!("max entry error {worst:.2e}"))
}

/// Comparison residual on 1000 spherical triangles with `δ = 1`.
fn criterion_2() -> Outcome {
    check_passed(&proxgeo_lab::scenarios::comparison_sphere_sweep(1000, 2))
}

/// Convex-mode cone definition against the projection test, 200 pairs per example.
fn criterion_3() -> Outcome {
    let s2 = Manifold::sphere();
    let p = Manifold::paraboloid();
    let a = suite::cone_equivalence(&s2, &cap(&s2), 200, 3);
    let b = suite::cone_equivalence(&p, &paraboloid_set(&p), 200, 3);
    expect(a.passed() && b.passed(), format!("cap {:.3}, paraboloid {:.3}", a.measured, b.measured))
}

/// Unique feet on 200 tube points per example; duplicates beyond the tube of the arc.
fn criterion_4() -> Outcome {
    let s2 = Manifold::sphere();
    let p = Manifold::paraboloid();
    let mut worst = 0.0f64;
    for (m, set) in [(&s2, cap(&s2)), (&p, paraboloid_set(&p))] {
        let pts = tube_sample(m, &set, 200, 4, None).map_err(|e| e.to_string())?;
        let r = verify_projection_uniqueness(m, &set, &pts).map_err(|e| e.to_string())?;
        if !r.pass() {
            return Err(format!("{}: projection not unique", m.name()));
        }
        worst = worst.max(r.entries.iter().map(|e| e.foot_error).fold(0.0, f64::max));
    }
    let arc = equator_arc(&s2);
    let mid = sphere_point(&s2, 0.0, 0.0);
    let y = s2.exp(&from_ambient(&s2, &mid, &[0.0, 0.0, 1.0]).scaled(FRAC_PI_2 + 0.1)).unwrap();
    let dup = arc.project(&s2, &y).map_err(|e| e.to_string())?.duplicate_flag;
    expect(worst <= 1e-4 && dup, format!("max foot error {worst:.2e}, arc duplicate {dup}"))
}

/// Support hypersurface of the cap, and of a hyperbolic ball with radius `ε/2`.
fn criterion_5() -> Outcome {
    let m = Manifold::sphere();
    let set = cap(&m);
    let x = set.boundary_sample(&m, 1, 5).unwrap().remove(0);
    let v = SignedDistanceField::new(&m, set.clone()).unwrap().inward_normal(&m, &x).unwrap().scaled(-1.0);
    let h = support_hypersurface(&m, &set, &x, &v, &SupportOptions::default()).map_err(|e| e.to_string())?;
    let ts: Vec<f64> = (1..=5).map(|k| k as f64 / 6.0 * h.radius).collect();
    let r = verify_support(&m, &set, &h, &ts, 200, 0.5 * h.radius, 5).map_err(|e| e.to_string())?;
    let ray = r.rays.iter().map(|c| (c.d_h - c.d_s).abs()).fold(0.0, f64::max);

    let hm = Manifold::hyperbolic();
    let ball = Arc::new(ConvexSet::ball(&hm, Point::new(0, &[0.0, 0.0]), 0.5).unwrap());
    let hx = ball.boundary_sample(&hm, 1, 5).unwrap().remove(0);
    let hv = hm.log_map(&hx, &Point::new(0, &[0.0, 0.0])).unwrap().scaled(-1.0);
    let hh = support_hypersurface(&hm, &ball, &hx, &hv, &SupportOptions::default()).map_err(|e| e.to_string())?;
    let eps = hm.convexity_radius(&hx).unwrap();
    let hts: Vec<f64> = (1..=5).map(|k| k as f64 / 6.0 * hh.radius).collect();
    let hr = verify_support(&hm, &ball, &hh, &hts, 200, 0.5 * hh.radius, 5).map_err(|e| e.to_string())?;
    let ok = r.pass
        && ray <= 1e-5
        && r.strict_fraction() >= 0.95
        && hr.pass
        && hr.strict_fraction() >= 0.95
        && (hh.radius - 0.5 * eps).abs() <= 1e-12;
    expect(ok, format!("cap ray error {ray:.2e}, strict {:.3}; H² radius {:.3} = ε/2, strict {:.3}", r.strict_fraction(), hh.radius, hr.strict_fraction()))
}

/// Concavity witness for the equator arc at latitude 0.3.
fn criterion_6() -> Outcome {
    let m = Manifold::sphere();
    let arc = equator_arc(&m);
    let w = concavity_witness(&m, &arc, &sphere_point(&m, 0.3, 0.0), &WitnessOptions::default()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (s, d) in w.s.iter().zip(&w.profile) {
        if s.abs() <= 0.2 + 1e-12 {
            worst = worst.max((d - (0.3f64.sin() * s.cos()).asin()).abs());
        }
    }
    let d2 = (w.second_difference + 0.3f64.tan()).abs();
    expect(worst <= 1e-6 && d2 <= 5e-3 && w.accepted(), format!("profile error {worst:.2e}, |D2 + tan 0.3| = {d2:.2e}"))
}

/// Convexity of `d_S` near the cap and the paraboloid sublevel.
fn criterion_7() -> Outcome {
    let s2 = Manifold::sphere();
    let p = Manifold::paraboloid();
    let mut detail = Vec::new();
    let mut ok = true;
    for (m, set) in [(&s2, cap(&s2)), (&p, paraboloid_set(&p))] {
        let region = ReportRegion::Tube { set: set.clone(), fraction: 0.3, epsilon: None };
        let opts = ReportOptions { n_geodesics: 500, seed: 7, ..ReportOptions::default() };
        let r = convexity_report(m, &ReportTarget::Distance(set.clone()), &region, &opts).map_err(|e| e.to_string())?;
        let min_h = r.min_h.unwrap_or(f64::NAN);
        ok &= r.pass && r.n_geodesics == 500 && min_h > 0.5;
        detail.push(format!("{} {} h {min_h:.4}", m.name(), if r.pass { "PASS" } else { "FAIL" }));
    }
    let set = cap(&s2);
    let sdf = SignedDistanceField::new(&s2, set.clone()).unwrap();
    let mut cap_err = 0.0f64;
    for x in set.boundary_sample(&s2, 10, 7).unwrap() {
        let h = second_fundamental_form(&s2, &sdf, &x).map_err(|e| e.to_string())?;
        cap_err = cap_err.max((h.min_eigenvalue() - 1.0 / 3f64.sqrt()).abs());
    }
    ok &= cap_err <= 1e-3;
    detail.push(format!("|h − 1/√3| {cap_err:.2e}"));
    expect(ok, detail.join(", "))
}

/// Superjet soundness for a convex field and the certificate for a concave bump.
fn criterion_8() -> Outcome {
    let m = Manifold::sphere();
    let p = sphere_point(&m, 0.4, 0.2);
    let r = superjet_positivity(&m, &ScalarField::SquaredDistance(p.clone()), &p, 0.3, 50, 8).map_err(|e| e.to_string())?;
    let x = sphere_point(&m, 0.0, 0.0);
    let east = from_ambient(&m, &x, &[0.0, 1.0, 0.0]);
    let a = m.exp(&east.scaled(-0.5)).unwrap();
    let b = m.exp(&east.scaled(0.5)).unwrap();
    let path = m.geodesic_between(&a, &b, 32).unwrap();
    let mid = m.path_point(&path, 0.5 * path.t_end).unwrap();
    let f = ScalarField::SquaredDistance(mid).scaled(-1.0);
    let c = nonconvexity_certificate(&m, &f, &path, 0.5, &CertificateOptions::default()).map_err(|e| e.to_string())?;
    expect(
        r.pass && r.points == 50 && r.accepted > 0 && c.valid,
        format!("min eig {:.3e} over {} jets, certificate interior distance {:.3e}", r.min_eig, r.accepted, c.interior_distance),
    )
}

/// Backbone suites on the four built-in surfaces.
fn criterion_9() -> Outcome {
    let report = run_default("numerical_backbone", 9).map_err(|e| e.to_string())?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
    expect(report.pass && report.checks.len() == 12, format!("{} checks, failed {:?}", report.checks.len(), failed))
}

/// Two CLI runs with the same seed give identical artifacts.
fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let st = Command::new(env!("CARGO_BIN_EXE_lab"))
            .args(["run", "example_sphere_cap", "--seed", "7", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if st.status.code() != Some(0) {
            return Err(format!("exit {:?}", st.status.code()));
        }
        let json = std::fs::read(out.join("example_sphere_cap.json")).map_err(|e| e.to_string())?;
        let csv = std::fs::read(out.join("example_sphere_cap.csv")).map_err(|e| e.to_string())?;
        outputs.push((json, csv, st.stdout));
    }
    let same = outputs[0] == outputs[1];
    expect(same, format!("{} JSON bytes, identical {same}", outputs[0].0.len()))
}

fn main() -> ExitCode {
    let criteria: [(fn() -> Outcome, u64); 10] = [
        (criterion_1, 5),
        (criterion_2, 30),
        (criterion_3, 120),
        (criterion_4, 120),
        (criterion_5, 60),
        (criterion_6, 30),
        (criterion_7, 180),
        (criterion_8, 120),
        (criterion_9, 60),
        (criterion_10, 120),
    ];
    let mut failures = 0;
    for (i, (run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (ok, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        failures += usize::from(!ok);
        println!(
            "criterion {:>2}: {} ({detail}; {:.1}s of {limit}s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
