mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use common::*;
use proxgeo_core::tubular::*;
use proxgeo_core::{GeoError, Manifold, Point, ToleranceProfile};

#[test]
fn tube_radius_formulas() {
    let exact = ToleranceProfile { curvature_margin: 0.0, ..ToleranceProfile::default() };
    let s = Manifold::sphere().with_tolerances(exact);
    let r = tube_radius(&s, &Point::new(0, &[0.3, 0.1]), Some(PI)).unwrap();
    assert!((r.t_x - FRAC_PI_2).abs() < 1e-6, "{}", r.t_x);

    let e = Manifold::euclidean(2);
    let r = tube_radius(&e, &Point::new(0, &[0.3, 0.1]), Some(1.0)).unwrap();
    assert_eq!(r.t_x, 0.5);

    // Gauss curvature of z = s² at the vertex is 4.
    let p = Manifold::paraboloid();
    let r = tube_radius(&p, &Point::new(0, &[0.0, 0.0]), Some(2.0)).unwrap();
    let delta = r.delta.delta().unwrap();
    assert!((delta - 4.4).abs() < 0.05, "{delta}");
    assert!((r.t_x - (PI / (2.0 * delta.sqrt())).min(1.0)).abs() < 1e-12);
}

#[test]
fn cap_tube_points_have_unique_feet() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let pts = tube_sample(&m, &s, 40, 3, None).unwrap();
    assert_eq!(pts.len(), 40);
    for tp in &pts {
        assert!(tp.t > 0.0 && tp.t < tp.t_x);
        assert!((s.distance(&m, &tp.point).unwrap() - tp.t).abs() < 1e-6);
    }
    let report = verify_projection_uniqueness(&m, &s, &pts).unwrap();
    assert!(report.pass(), "{:?}", report.failures);
    assert!(report.max_foot_error <= 1e-4);
    assert_eq!(tube_sample(&m, &s, 1, 0, None).unwrap().len(), 1);
}

#[test]
fn tube_parameter_beyond_radius_is_rejected() {
    let m = Manifold::sphere();
    let (x, v) = cap_boundary(&m, 0.0);
    let t_x = tube_radius(&m, &x, None).unwrap().t_x;
    assert!(matches!(TubePoint::new(&m, x.clone(), v.clone(), t_x, t_x), Err(GeoError::InvalidInput(_))));
    assert!(TubePoint::new(&m, x, v, 0.5 * t_x, t_x).is_ok());
}

#[test]
fn shrinking_the_tube_parameter_keeps_uniqueness() {
    let m = Manifold::sphere();
    let s = cap(&m);
    for tp in tube_sample(&m, &s, 5, 11, None).unwrap() {
        let nested: Vec<TubePoint> = [1.0, 0.5, 0.25, 0.125]
            .iter()
            .map(|f| TubePoint::new(&m, tp.foot.clone(), tp.direction.clone(), f * tp.t, tp.t_x).unwrap())
            .collect();
        assert!(verify_projection_uniqueness(&m, &s, &nested).unwrap().pass());
    }
}

#[test]
fn nearby_tube_points_have_nearby_feet() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let pts = tube_sample(&m, &s, 100, 17, None).unwrap();
    for (i, tp) in pts.iter().enumerate() {
        let t2 = if tp.t + 1e-3 < tp.t_x { tp.t + 6e-4 } else { tp.t - 6e-4 };
        let q = TubePoint::new(&m, tp.foot.clone(), tp.direction.clone(), t2, tp.t_x).unwrap();
        let e = m.orthonormal_frame(&q.point, None);
        let shift = proxgeo_core::TangentVector::new(q.point.clone(), e.column(i % 2) * 3e-4);
        let y = m.exp(&shift).unwrap();
        assert!(m.distance(&tp.point, &y).unwrap() <= 1e-3);
        let f1 = &s.project(&m, &tp.point).unwrap().minimizers[0];
        let f2 = &s.project(&m, &y).unwrap().minimizers[0];
        assert!(m.distance(f1, f2).unwrap() <= 0.1);
    }
}

#[test]
fn beyond_the_pole_the_arc_projection_is_not_unique() {
    let m = Manifold::sphere();
    let arc = equator_arc(&m, 1.0);
    let x = sphere_point(&m, 0.0, 0.0);
    let v = from_ambient(&m, &x, &[0.0, 0.0, 1.0]);
    let y = m.exp(&v.scaled(FRAC_PI_2 + 0.1)).unwrap();
    let res = arc.project(&m, &y).unwrap();
    assert!(res.duplicate_flag);
    assert!(res.minimizers.len() >= 2);
    // Brute force over the arc: the two endpoints tie.
    let ye = m.embed(&y).unwrap();
    let d = |lon: f64| (ye[0] * lon.cos() + ye[1] * lon.sin()).clamp(-1.0, 1.0).acos();
    assert!((res.value - d(0.5)).abs() < 1e-7 && (d(0.5) - d(-0.5)).abs() < 1e-12);
}

#[test]
fn half_plane_projection_is_unique_at_any_distance() {
    let m = Manifold::euclidean(2);
    let s = half_plane(&m);
    for (x, t) in [(0.3, 0.1), (-1.0, 1.5), (2.0, 0.7)] {
        let foot = Point::new(0, &[x, 0.0]);
        let dir = proxgeo_core::TangentVector::from_slice(&foot, &[0.0, 1.0]);
        let tp = TubePoint::new(&m, foot, dir, t, 10.0).unwrap();
        assert!(verify_projection_uniqueness(&m, &s, &[tp]).unwrap().pass());
    }
}
