use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proxgeo_core::manifold::FermiChart;
use proxgeo_core::{CurvatureBound, Manifold, Point, ScalarField, TangentVector};

fn unit3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn unit_norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Tangent components of an ambient vector at `p`.
fn from_ambient(m: &Manifold, p: &Point, e: &[f64]) -> TangentVector {
    let j = m.embedding_jacobian(p).unwrap();
    let e = DVector::from_column_slice(e);
    let a = (j.transpose() * &j).cholesky().unwrap().solve(&(j.transpose() * e));
    TangentVector::new(p.clone(), a)
}

fn to_ambient(m: &Manifold, v: &TangentVector) -> DVector<f64> {
    m.embedding_jacobian(&v.base).unwrap() * &v.components
}

#[test]
fn sphere_distance_matches_angle_between_unit_vectors() {
    let m = Manifold::sphere();
    let pts = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.3, -0.4, 0.866],
        [-0.5, 0.5, -0.7],
        [0.2, 0.9, -0.1],
    ];
    for a in pts {
        for b in pts {
            let (a, b) = (unit3(a), unit3(b));
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
            let expected = unit_norm(cross).atan2(dot);
            if expected > 0.95 * PI {
                continue;
            }
            let pa = m.point_from_embedding(&a).unwrap();
            let pb = m.point_from_embedding(&b).unwrap();
            let d = m.distance(&pa, &pb).unwrap();
            assert!((d - expected).abs() < 1e-8, "{a:?} {b:?}: {d} vs {expected}");
        }
    }
}

#[test]
fn sphere_exp_from_north_pole_follows_great_circles() {
    let m = Manifold::sphere();
    let np = m.point_from_embedding(&[0.0, 0.0, 1.0]).unwrap();
    for (theta, phi) in [(0.3, 0.0), (1.0, 1.2), (2.5, -2.0), (FRAC_PI_2, 0.7)] {
        let v = from_ambient(&m, &np, &[theta * f64::cos(phi), theta * f64::sin(phi), 0.0]);
        let y = m.embed(&m.exp(&v).unwrap()).unwrap();
        let expected = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        for i in 0..3 {
            assert!((y[i] - expected[i]).abs() < 1e-9);
        }
    }
}

#[test]
fn sphere_log_inverts_exp_near_antipode() {
    let m = Manifold::sphere();
    let p = m.point_from_embedding(&[1.0, 0.0, 0.0]).unwrap();
    let v = from_ambient(&m, &p, &[0.0, 2.8, 0.5]);
    let q = m.exp(&v).unwrap();
    let w = m.log_map(&p, &q).unwrap();
    assert!((&w.components - &v.components).norm() < 1e-7);
}

#[test]
fn transport_along_meridian_fixes_the_normal_direction() {
    // Along the great circle in the xz-plane, the ambient vector (0, 1, 0)
    // is parallel; the velocity rotates within the plane.
    let m = Manifold::sphere();
    let np = m.point_from_embedding(&[0.0, 0.0, 1.0]).unwrap();
    let theta = 1.1;
    let path = m.geodesic(&from_ambient(&m, &np, &[theta, 0.0, 0.0]), 1.0, 32).unwrap();
    let w = from_ambient(&m, &np, &[0.0, 1.0, 0.0]);
    let out = to_ambient(&m, &m.parallel_transport(&w, &path).unwrap());
    assert!((out - DVector::from_column_slice(&[0.0, 1.0, 0.0])).norm() < 1e-8);
    let u = from_ambient(&m, &np, &[1.0, 0.0, 0.0]);
    let out = to_ambient(&m, &m.parallel_transport(&u, &path).unwrap());
    let expected = DVector::from_column_slice(&[theta.cos(), 0.0, -theta.sin()]);
    assert!((out - expected).norm() < 1e-8);
}

#[test]
fn sectional_curvature_of_model_spaces() {
    let e = DVector::from_column_slice(&[1.0, 0.0]);
    let f = DVector::from_column_slice(&[0.3, 1.0]);
    for (m, k, pts) in [
        (Manifold::sphere(), 1.0, vec![[0.0, 0.0], [0.4, -0.7], [1.2, 0.3]]),
        (Manifold::hyperbolic(), -1.0, vec![[0.0, 0.0], [0.3, 0.2], [-0.5, 0.4]]),
        (Manifold::euclidean(2), 0.0, vec![[0.0, 0.0], [3.0, -2.0]]),
    ] {
        for c in pts {
            let p = Point::new(0, &c);
            let got = m.sectional_curvature(&p, &e, &f).unwrap();
            assert!((got - k).abs() < 1e-5, "{}: {got}", m.name());
        }
    }
}

#[test]
fn curvature_bounds_carry_the_margin() {
    let s = Manifold::sphere();
    let p = Point::new(0, &[0.2, 0.1]);
    match s.local_curvature_bound(&p, 0.5).unwrap() {
        CurvatureBound::Positive(d) => assert!((d - 1.1).abs() < 1e-4),
        other => panic!("{other:?}"),
    }
    let h = Manifold::hyperbolic();
    assert_eq!(h.local_curvature_bound(&p, 0.5).unwrap(), CurvatureBound::NonPositive);
    assert!(CurvatureBound::NonPositive.half_conjugate_radius().is_infinite());
    let r = s.convexity_radius(&p).unwrap();
    assert!((r - FRAC_PI_2 / 1.1f64.sqrt()).abs() < 1e-3, "{r}");
}

#[test]
fn paraboloid_hessian_in_polar_chart() {
    let m = Manifold::paraboloid();
    let f = ScalarField::ChartQuadratic {
        chart: 1,
        q: DMatrix::from_diagonal(&DVector::from_column_slice(&[2.0, 0.0])),
        b: DVector::zeros(2),
        c: 0.0,
    };
    for (s, theta) in [(0.1, 0.0), (0.37, 1.0), (0.64, 2.5), (1.0, -1.3)] {
        let h = m.hessian(&f, &Point::new(1, &[s, theta])).unwrap();
        let d = 1.0 + 4.0 * s * s;
        assert!((h.matrix[(0, 0)] - 2.0 / d).abs() < 1e-4);
        assert!((h.matrix[(1, 1)] - 2.0 * s * s / d).abs() < 1e-4);
        assert!(h.matrix[(0, 1)].abs() < 1e-4);
    }
}

#[test]
fn euclidean_quadratic_hessian_is_q() {
    let m = Manifold::euclidean(3);
    let q = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, -0.3, 0.0, -0.3, 4.0]);
    let f = ScalarField::ChartQuadratic { chart: 0, q: q.clone(), b: DVector::from_column_slice(&[1.0, 0.0, -2.0]), c: 3.0 };
    let h = m.hessian(&f, &Point::new(0, &[0.4, -1.0, 2.0])).unwrap();
    assert!((h.matrix - q).amax() < 1e-6);
}

#[test]
fn half_squared_distance_has_identity_hessian_at_its_center() {
    for m in [Manifold::sphere(), Manifold::hyperbolic(), Manifold::paraboloid()] {
        let p = Point::new(0, &[0.2, -0.1]);
        let f = ScalarField::SquaredDistance(p.clone()).scaled(0.5);
        let h = m.hessian(&f, &p).unwrap();
        let eig = h.eigenvalues(&m);
        for e in eig {
            assert!((e - 1.0).abs() < 1e-4, "{}: {e}", m.name());
        }
    }
}

#[test]
fn fermi_chart_is_affine_in_euclidean_space() {
    let m = Manifold::euclidean(2);
    let p = Point::new(0, &[1.0, 2.0]);
    let path = m.geodesic(&TangentVector::from_slice(&p, &[3.0, 4.0]), 1.0, 8).unwrap();
    let chart = FermiChart::new(&m, &path).unwrap();
    assert!((chart.length - 5.0).abs() < 1e-12);
    let y = chart.map(&m, 2.0, &[0.5]).unwrap();
    let n = &chart.normals[0];
    let expected = DVector::from_column_slice(&[1.0 + 1.2, 2.0 + 1.6]) + n * 0.5;
    assert!((&y.coords - expected).norm() < 1e-10);
    let (t, x) = chart.inverse(&m, &y).unwrap();
    assert!((t - 2.0).abs() < 1e-9 && (x[0] - 0.5).abs() < 1e-9);
}

#[test]
fn fermi_chart_along_the_equator_is_latitude_longitude() {
    let m = Manifold::sphere();
    let a = m.point_from_embedding(&[1.0, 0.0, 0.0]).unwrap();
    let path = m.geodesic(&from_ambient(&m, &a, &[0.0, 1.0, 0.0]), 1.0, 16).unwrap();
    let chart = FermiChart::new(&m, &path).unwrap();
    let nz = to_ambient(&m, &TangentVector::new(a.clone(), chart.normals[0].clone()))[2].signum();
    for (t, x) in [(0.0, 0.2), (0.4, -0.3), (0.9, 0.5)] {
        let y = m.embed(&chart.map(&m, t, &[x]).unwrap()).unwrap();
        let lat = nz * x;
        let expected = [lat.cos() * f64::cos(t), lat.cos() * f64::sin(t), lat.sin()];
        for i in 0..3 {
            assert!((y[i] - expected[i]).abs() < 1e-9);
        }
    }
}

#[test]
fn comparison_residual_vanishes_on_the_unit_sphere() {
    use rand::{Rng, SeedableRng};
    let m = Manifold::sphere();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let mut pt = || {
            let v = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, 1.5 + rng.random::<f64>()];
            m.point_from_embedding(&unit3(v)).unwrap()
        };
        let (a, b, c) = (pt(), pt(), pt());
        let Ok((_, rho)) = m.triangle_comparison(&a, &b, &c, 1.0) else { continue };
        assert!(rho >= -1e-9 && rho.abs() <= 1e-6, "{rho}");
        checked += 1;
    }
}

fn chart_point(m: &Manifold, r: f64) -> impl Strategy<Value = Point> {
    let _ = m;
    (-r..r, -r..r).prop_map(|(u, v)| Point::new(0, &[u, v]))
}

fn models() -> Vec<(Manifold, f64, f64)> {
    // (manifold, chart box half-width, max tangent norm)
    vec![
        (Manifold::euclidean(2), 2.0, 3.0),
        (Manifold::sphere(), 1.0, 0.9 * PI * 0.9),
        (Manifold::hyperbolic(), 0.6, 2.0),
        (Manifold::paraboloid(), 0.8, 0.8),
    ]
}

fn tangent_of_norm(m: &Manifold, p: &Point, dir: f64, len: f64) -> TangentVector {
    let e = m.orthonormal_frame(p, None);
    TangentVector::new(p.clone(), (e.column(0) * dir.cos() + e.column(1) * dir.sin()) * len)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn exp_log_roundtrip(which in 0usize..4, c in (-1.0f64..1.0, -1.0f64..1.0), dir in 0.0f64..6.283, frac in 0.0f64..1.0) {
        let (m, r, vmax) = models().swap_remove(which);
        let p = Point::new(0, &[c.0 * r, c.1 * r]);
        let v = tangent_of_norm(&m, &p, dir, frac * vmax);
        let q = m.exp(&v).unwrap();
        let w = m.log_map(&p, &q).unwrap();
        let err = m.norm(&TangentVector::new(p.clone(), &w.components - &v.components));
        prop_assert!(err <= 1e-6 * (1.0 + m.norm(&v)), "{}: err {err}", m.name());
    }

    #[test]
    fn geodesics_have_constant_speed_and_length_energy_identity(which in 0usize..4, c in (-1.0f64..1.0, -1.0f64..1.0), dir in 0.0f64..6.283, len in 0.05f64..1.0, span in 0.5f64..2.0) {
        let (m, r, vmax) = models().swap_remove(which);
        let p = Point::new(0, &[c.0 * r, c.1 * r]);
        let v = tangent_of_norm(&m, &p, dir, len * vmax / span);
        let path = m.geodesic(&v, span, 64).unwrap();
        prop_assert!(path.speed_defect(&m) <= 1e-6);
        let l2 = path.length * path.length;
        prop_assert!((l2 - span * path.energy).abs() <= 1e-8 * l2);
    }

    #[test]
    fn transport_is_an_isometry(which in 0usize..4, c in (-1.0f64..1.0, -1.0f64..1.0), dir in 0.0f64..6.283, len in 0.05f64..1.0, wdir in 0.0f64..6.283, wlen in 0.1f64..3.0) {
        let (m, r, vmax) = models().swap_remove(which);
        let p = Point::new(0, &[c.0 * r, c.1 * r]);
        let path = m.geodesic(&tangent_of_norm(&m, &p, dir, len * vmax), 1.0, 16).unwrap();
        let w = tangent_of_norm(&m, &p, wdir, wlen);
        let out = m.parallel_transport(&w, &path).unwrap();
        prop_assert!((m.norm(&out) - wlen).abs() <= 1e-7);
    }

    #[test]
    fn gradient_matches_analytic_differential(which in 0usize..4, p in chart_point(&Manifold::euclidean(2), 0.6), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let (m, _, _) = models().swap_remove(which);
        let q = DMatrix::from_row_slice(2, 2, &[a, 0.3, 0.3, b]);
        let f = ScalarField::ChartQuadratic { chart: 0, q, b: DVector::from_column_slice(&[b, -a]), c: 0.5 };
        let analytic = f.analytic_differential(&m, &p).unwrap().unwrap();
        let fd = m.differential(&f, &p).unwrap();
        prop_assert!((&analytic - &fd).norm() <= 1e-5 * (1.0 + analytic.norm()));
        let h = m.hessian(&f, &p).unwrap();
        prop_assert!(h.asymmetry() <= 1e-6);
    }
}

#[test]
fn flat_comparison_residual_signs() {
    // Law of cosines: zero in the plane, nonnegative under curvature ≤ 0.
    let e = Manifold::euclidean(2);
    let (a, b, c) = (Point::new(0, &[0.0, 0.0]), Point::new(0, &[1.0, 0.2]), Point::new(0, &[0.3, 0.9]));
    assert!(e.triangle_comparison(&a, &b, &c, 0.0).unwrap().1.abs() < 1e-9);
    let h = Manifold::hyperbolic();
    let (a, b, c) = (Point::new(0, &[0.0, 0.0]), Point::new(0, &[0.5, 0.1]), Point::new(0, &[0.1, 0.6]));
    assert!(h.triangle_comparison(&a, &b, &c, 0.0).unwrap().1 > 1e-3);
    assert!(h.triangle_comparison(&a, &b, &c, 1.0).unwrap().1 > 1e-3);
}
