mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
use std::sync::Arc;

use common::*;
use nalgebra::DVector;
use proxgeo_core::convexity::*;
use proxgeo_core::{ConvexSet, GeoError, Manifold, Point, ScalarField, TangentVector};

fn equator_path(m: &Manifold, len: f64) -> proxgeo_core::GeodesicPath {
    let a = sphere_point(m, 0.0, 0.0);
    m.geodesic(&from_ambient(m, &a, &[0.0, 1.0, 0.0]), len, 16).unwrap()
}

#[test]
fn euclidean_jacobi_fields_are_affine() {
    let m = Manifold::euclidean(2);
    let p = Point::new(0, &[0.0, 0.0]);
    let path = m.geodesic(&TangentVector::from_slice(&p, &[2.0, 0.0]), 1.0, 8).unwrap();
    let v0 = DVector::from_column_slice(&[0.0, 1.0]);
    let v1 = DVector::from_column_slice(&[0.5, -2.0]);
    let j = jacobi_field(&m, &path, &v0, &v1, 40).unwrap();
    for (i, t) in j.frame.times.iter().enumerate() {
        let expected = &v0 * (1.0 - t) + &v1 * *t;
        assert!((j.vectors()[i].components.clone() - expected).norm() < 1e-10);
    }
    assert!(j.residual < 1e-8);
}

#[test]
fn sphere_jacobi_field_follows_the_sine_profile() {
    let m = Manifold::sphere();
    let len = 2.0;
    let path = equator_path(&m, len);
    let end = path.final_tangent();
    let w = from_ambient(&m, &end.base, &[0.0, 0.0, 1.0]).components;
    let j = jacobi_field(&m, &path, &DVector::zeros(2), &w, 80).unwrap();
    let last = j.frame.len() - 1;
    let wn = j.field.components[last][1];
    for (i, t) in j.frame.times.iter().enumerate() {
        let a = &j.field.components[i];
        assert!(a[0].abs() < 1e-8);
        assert!((a[1] - wn * t.sin() / len.sin()).abs() < 1e-7, "{t}");
    }
    assert!(j.residual < 1e-5, "{}", j.residual);
}

#[test]
fn antipodal_endpoints_are_conjugate() {
    let m = Manifold::sphere();
    let path = equator_path(&m, std::f64::consts::PI);
    let w = DVector::from_column_slice(&[0.1, 0.2]);
    assert!(matches!(jacobi_field(&m, &path, &w, &w, 80), Err(GeoError::ConjugatePoint)));
}

#[test]
fn index_form_of_parallel_fields() {
    let m = Manifold::sphere();
    let len = 1.3;
    let frame = PathFrame::new(&m, &equator_path(&m, len), 64).unwrap();
    let w = PathField::parallel(&frame, DVector::from_column_slice(&[0.0, 1.0]));
    assert!((index_form(&frame, &w, &w).unwrap() + len).abs() < 1e-6);

    let e = Manifold::euclidean(2);
    let p = Point::new(0, &[1.0, 1.0]);
    let frame = PathFrame::new(&e, &e.geodesic(&TangentVector::from_slice(&p, &[1.0, 2.0]), 1.0, 8).unwrap(), 16).unwrap();
    let w = PathField::parallel(&frame, DVector::from_column_slice(&[0.3, 1.0]));
    assert!(index_form(&frame, &w, &w).unwrap().abs() < 1e-12);

    let short = PathField { components: vec![DVector::zeros(2); 3], derivatives: None };
    assert!(matches!(index_form(&frame, &short, &w), Err(GeoError::GridMismatch)));
}

#[test]
fn jacobi_fields_minimize_the_index_form() {
    use rand::Rng;
    let m = Manifold::sphere();
    let mut rng = proxgeo_core::rng_from_seed(19);
    for _ in 0..100 {
        let len = 0.2 + 2.5 * rng.random::<f64>();
        let lat = rng.random::<f64>() - 0.5;
        let a = sphere_point(&m, lat, rng.random::<f64>());
        let e = m.orthonormal_frame(&a, None);
        let ang: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let v = (e.column(0) * ang.cos() + e.column(1) * ang.sin()) * len;
        let path = m.geodesic(&TangentVector::new(a, v), 1.0, 16).unwrap();
        let frame = PathFrame::new(&m, &path, 64).unwrap();
        let last = frame.len() - 1;
        let a0 = DVector::from_column_slice(&[rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5]);
        let a1 = DVector::from_column_slice(&[rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5]);
        let j = jacobi_field(&m, &path, &frame.vector(0, &a0).components, &frame.vector(last, &a1).components, 64).unwrap();
        let bump = rng.random::<f64>() - 0.5;
        let w = PathField::from_fn(&frame, |t| {
            let s = t / path.t_end;
            &a0 * (1.0 - s) + &a1 * s + DVector::from_column_slice(&[0.0, bump * (std::f64::consts::PI * s).sin()])
        });
        let ij = index_form(&j.frame, &j.field, &j.field).unwrap();
        let iw = index_form(&frame, &w, &w).unwrap();
        assert!(ij <= iw + 1e-6, "{ij} > {iw}");
    }
}

#[test]
fn variation_of_the_zero_field_keeps_the_length() {
    let m = Manifold::sphere();
    let path = equator_path(&m, 1.0);
    let j = jacobi_field(&m, &path, &DVector::zeros(2), &DVector::zeros(2), 32).unwrap();
    let curves = j.variation_curves(&m, &[0.0]).unwrap();
    assert!((curves[0].1 - 1.0).abs() < 1e-3);
}

#[test]
fn equator_arc_witness_matches_the_closed_form() {
    let m = Manifold::sphere();
    let arc = equator_arc(&m, 1.0);
    let t = 0.3;
    let x = sphere_point(&m, t, 0.0);
    let w = concavity_witness(&m, &arc, &x, &WitnessOptions::default()).unwrap();
    for (s, d) in w.s.iter().zip(&w.profile) {
        assert!((d - (t.sin() * s.cos()).asin()).abs() <= 1e-6);
    }
    assert!((w.second_difference + t.tan()).abs() <= 5e-3);
    assert!(w.first_difference.abs() <= 1e-4);
    assert!(w.accepted());
}

#[test]
fn flat_segment_has_no_strict_maximum() {
    let m = Manifold::euclidean(2);
    let seg = ConvexSet::segment(&m, Point::new(0, &[-0.5, 0.0]), Point::new(0, &[0.5, 0.0])).unwrap();
    let w = concavity_witness(&m, &seg, &Point::new(0, &[0.0, 0.3]), &WitnessOptions::default()).unwrap();
    assert!(w.second_difference.abs() <= 1e-6);
    assert!(!w.accepted());
    assert!(matches!(
        concavity_witness(&m, &seg, &Point::new(0, &[0.1, 0.0]), &WitnessOptions::default()),
        Err(GeoError::InvalidInput(_))
    ));
    let m = Manifold::sphere();
    assert!(matches!(
        concavity_witness(&m, &cap(&m), &sphere_point(&m, 0.0, 0.0), &WitnessOptions::default()),
        Err(GeoError::NotAGeodesicBoundary)
    ));
}

#[test]
fn cap_signed_distance() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let sdf = SignedDistanceField::new(&m, s.clone()).unwrap();
    let circle: Vec<[f64; 3]> = (0..2000)
        .map(|i| {
            let lon = std::f64::consts::TAU * i as f64 / 2000.0;
            let c = FRAC_PI_3.sin();
            [c * lon.cos(), c * lon.sin(), 0.5]
        })
        .collect();
    for (lat, lon) in [(1.2, 0.1), (0.9, 2.0), (0.3, -1.0), (-0.4, 0.7)] {
        let p = sphere_point(&m, lat, lon);
        let e = m.embed(&p).unwrap();
        let d_w = circle
            .iter()
            .map(|c| (e[0] * c[0] + e[1] * c[1] + e[2] * c[2]).clamp(-1.0, 1.0).acos())
            .fold(f64::INFINITY, f64::min);
        let phi = sdf.eval(&m, &p).unwrap();
        // Grid spacing bounds the brute-force error.
        assert!((phi.abs() - d_w).abs() < 1e-5, "{phi} {d_w}");
        assert_eq!(phi < 0.0, s.contains(&m, &p).unwrap());
    }
    let field = sdf.as_field();
    for lon in [0.0, 1.0, 2.5] {
        let (x, outward) = cap_boundary(&m, lon);
        assert!(sdf.eval(&m, &x).unwrap().abs() < 1e-10);
        let g = m.gradient(&field, &x).unwrap();
        let n = m.normalize(&outward).unwrap();
        assert!((g.components - n.components).norm() < 1e-4);
    }
}

#[test]
fn second_fundamental_forms() {
    let m = Manifold::sphere();
    let sdf = SignedDistanceField::new(&m, cap(&m)).unwrap();
    for x in cap(&m).boundary_sample(&m, 10, 1).unwrap() {
        let h = second_fundamental_form(&m, &sdf, &x).unwrap();
        assert!((h.matrix[(0, 0)] - 1.0 / 3f64.sqrt()).abs() < 1e-3);
        assert!(h.asymmetry() <= 1e-4);
    }

    let hemi = Arc::new(ConvexSet::ball(&m, m.point_from_embedding(&[0.0, 0.0, 1.0]).unwrap(), FRAC_PI_2).unwrap());
    let sdf = SignedDistanceField::new(&m, hemi.clone()).unwrap();
    for x in hemi.boundary_sample(&m, 5, 1).unwrap() {
        assert!(second_fundamental_form(&m, &sdf, &x).unwrap().matrix[(0, 0)].abs() < 1e-6);
    }

    let mp = Manifold::paraboloid();
    let par = paraboloid_sublevel(&mp, 0.5);
    let sdf = SignedDistanceField::new(&mp, par.clone()).unwrap();
    for x in par.boundary_sample(&mp, 10, 1).unwrap() {
        assert!(second_fundamental_form(&mp, &sdf, &x).unwrap().min_eigenvalue() > 0.5);
    }
}

#[test]
fn signed_distance_hessian_restricts_to_the_second_fundamental_form() {
    for (m, set) in [
        (Manifold::sphere(), cap(&Manifold::sphere())),
        (Manifold::paraboloid(), paraboloid_sublevel(&Manifold::paraboloid(), 0.5)),
    ] {
        let sdf = SignedDistanceField::new(&m, set.clone()).unwrap();
        let field = sdf.as_field();
        for x in set.boundary_sample(&m, 30, 6).unwrap() {
            let h = second_fundamental_form(&m, &sdf, &x).unwrap();
            let hess = m.hessian_with_step(&field, &x, 1e-3).unwrap();
            let v = &h.tangent_basis[0];
            let lhs = hess.eval(v, v);
            assert!((lhs - h.matrix[(0, 0)]).abs() < 1e-3, "{}: {lhs} vs {}", m.name(), h.matrix[(0, 0)]);
        }
    }
}

#[test]
fn orientation_is_checked() {
    let m = Manifold::sphere();
    let arc = equator_arc(&m, 1.0);
    assert!(SignedDistanceField::new(&m, arc).is_err());
}

fn tube(set: &Arc<ConvexSet>) -> ReportRegion {
    ReportRegion::Tube { set: set.clone(), fraction: 0.3, epsilon: None }
}

#[test]
fn distance_to_cap_and_paraboloid_sublevel_is_convex_near_the_set() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let r = convexity_report(&m, &ReportTarget::Distance(s.clone()), &tube(&s), &ReportOptions::default()).unwrap();
    assert!(r.pass && r.asserted && r.consistent());
    assert_eq!(r.n_geodesics, 100);
    assert!((r.min_h.unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-3);

    let mp = Manifold::paraboloid();
    let par = paraboloid_sublevel(&mp, 0.5);
    let opts = ReportOptions { n_geodesics: 60, ..ReportOptions::default() };
    let r = convexity_report(&mp, &ReportTarget::Distance(par.clone()), &tube(&par), &opts).unwrap();
    assert!(r.pass && r.asserted);
    assert!(r.min_h.unwrap() > 0.5);
}

#[test]
fn distance_to_an_equator_arc_is_not_convex() {
    let m = Manifold::sphere();
    let arc = equator_arc(&m, 1.0);
    let opts = ReportOptions { n_geodesics: 40, ..ReportOptions::default() };
    let r = convexity_report(&m, &ReportTarget::Distance(arc.clone()), &tube(&arc), &opts).unwrap();
    assert!(!r.pass);
    assert!(r.min_h.is_none() && r.consistent());
    let worst = r.worst.expect("witness geodesic");
    assert!(worst.second_differences.iter().any(|d| *d < -1e-6));
}

#[test]
fn distance_to_a_hyperbolic_ball_is_convex_far_away() {
    let m = Manifold::hyperbolic();
    let o = Point::new(0, &[0.0, 0.0]);
    let ball = Arc::new(ConvexSet::ball(&m, o.clone(), 0.3).unwrap());
    let region = ReportRegion::Ball { center: o, radius: 2.5 };
    let opts = ReportOptions { n_geodesics: 60, ..ReportOptions::default() };
    let r = convexity_report(&m, &ReportTarget::Distance(ball), &region, &opts).unwrap();
    assert!(r.pass && r.consistent());
}

#[test]
fn squared_distance_field_report() {
    let m = Manifold::sphere();
    let p = sphere_point(&m, 0.2, 0.3);
    let region = ReportRegion::Ball { center: p.clone(), radius: 0.5 };
    let opts = ReportOptions { n_geodesics: 30, ..ReportOptions::default() };
    let convex = convexity_report(&m, &ReportTarget::Field(ScalarField::SquaredDistance(p.clone())), &region, &opts).unwrap();
    assert!(convex.pass);
    let concave = ScalarField::SquaredDistance(p).scaled(-1.0);
    assert!(!convexity_report(&m, &ReportTarget::Field(concave), &region, &opts).unwrap().pass);
}
