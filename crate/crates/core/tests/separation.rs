mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::Arc;

use common::*;
use proxgeo_core::separation::*;
use proxgeo_core::{ConvexSet, GeoError, Manifold, Point, TangentVector};

#[test]
fn cap_support_surface_is_the_tangent_great_circle() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let (x, v) = cap_boundary(&m, 0.0);
    let opts = SupportOptions { epsilon: Some(FRAC_PI_2), ..SupportOptions::default() };
    let h = support_hypersurface(&m, &s, &x, &v, &opts).unwrap();
    assert!((h.radius - FRAC_PI_4).abs() < 1e-12);
    let s3 = 3f64.sqrt() / 2.0;
    for a in [-1.2, -0.4, 0.3, 1.0] {
        let p = m.embed(&h.point(&m, &[a]).unwrap()).unwrap();
        assert!((-0.5 * p[0] + s3 * p[2]).abs() < 1e-9);
    }
}

#[test]
fn cap_support_verifies_on_the_ray_and_strictly_nearby() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let (x, v) = cap_boundary(&m, 1.3);
    let h = support_hypersurface(&m, &s, &x, &v, &SupportOptions::default()).unwrap();
    let r = verify_support(&m, &s, &h, &[0.02, 0.05, 0.1, 0.15, 0.2], 200, 0.3, 4).unwrap();
    assert!(r.pass);
    for ray in &r.rays {
        assert!((ray.d_h - ray.t).abs() <= 1e-5 && (ray.d_s - ray.t).abs() <= 1e-5);
    }
    assert!(r.strict_fraction() >= 0.95, "{}", r.strict_fraction());
}

#[test]
fn tangential_vector_is_not_a_normal() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let (x, _) = cap_boundary(&m, 0.0);
    let t = from_ambient(&m, &x, &[0.0, 1.0, 0.0]);
    assert!(matches!(support_hypersurface(&m, &s, &x, &t, &SupportOptions::default()), Err(GeoError::NotANormal)));
}

#[test]
fn half_plane_support_is_its_boundary_line() {
    let m = Manifold::euclidean(2);
    let s = half_plane(&m);
    let x = Point::new(0, &[0.4, 0.0]);
    let v = TangentVector::from_slice(&x, &[0.0, 1.0]);
    let h = support_hypersurface(&m, &s, &x, &v, &SupportOptions::default()).unwrap();
    for a in [-0.4, 0.1, 0.35] {
        assert!(h.point(&m, &[a]).unwrap().coords[1].abs() < 1e-12);
    }
    let r = verify_support(&m, &s, &h, &[0.05, 0.1, 0.2], 50, 0.3, 1).unwrap();
    assert!(r.pass);
    for ray in &r.rays {
        assert!((ray.d_h - ray.d_s).abs() < 1e-9);
    }
}

#[test]
fn separation_holds_on_the_hyperbolic_plane_without_curvature_limit() {
    let m = Manifold::hyperbolic();
    let ball = Arc::new(ConvexSet::ball(&m, Point::new(0, &[0.0, 0.0]), 0.5).unwrap());
    let x = ball.boundary_sample(&m, 1, 2).unwrap().remove(0);
    let v = m.log_map(&x, &Point::new(0, &[0.0, 0.0])).unwrap().scaled(-1.0);
    let h = support_hypersurface(&m, &ball, &x, &v, &SupportOptions::default()).unwrap();
    let eps = m.convexity_radius(&x).unwrap();
    assert!((h.radius - 0.5 * eps).abs() < 1e-12);
    let r = verify_support(&m, &ball, &h, &[0.05, 0.2, 0.5], 100, 0.5 * h.radius, 2).unwrap();
    assert!(r.pass);
    assert!(r.strict_fraction() >= 0.95);
}

#[test]
fn one_sided_near_the_base_point() {
    use proxgeo_core::rng_from_seed;
    use rand::Rng;
    let m = Manifold::sphere();
    let s = cap(&m);
    let (x, v) = cap_boundary(&m, -2.0);
    let h = support_hypersurface(&m, &s, &x, &v, &SupportOptions::default()).unwrap();
    let mut rng = rng_from_seed(3);
    let mut n = 0;
    while n < 500 {
        let theta = std::f64::consts::FRAC_PI_3 * rng.random::<f64>().sqrt();
        let y = sphere_point(&m, FRAC_PI_2 - theta, rng.random::<f64>() * std::f64::consts::TAU);
        if m.distance(&x, &y).unwrap() > h.radius {
            continue;
        }
        let w = m.log_map(&x, &y).unwrap();
        assert!(m.inner(&x, &v.components, &w.components) <= 1e-9);
        n += 1;
    }
}
