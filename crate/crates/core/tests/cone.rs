mod common;

use std::f64::consts::FRAC_PI_3;

use common::*;
use proptest::prelude::*;
use proxgeo_core::cone::*;
use proxgeo_core::sets::Region;
use proxgeo_core::{ConvexSet, GeoError, Manifold, ScalarField, TangentVector};

#[test]
fn cap_outward_meridian_is_a_normal() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let (x, v) = cap_boundary(&m, 0.4);
    for mode in [ConeMode::Convex, ConeMode::General] {
        let r = is_normal_definition(&m, &s, &x, &v, mode, &ConeOptions::default()).unwrap();
        assert!(r.member);
        assert_eq!(r.sigma, Some(0.0));
    }
    let p = is_normal_projection(&m, &s, &x, &v, 0.75).unwrap();
    assert!(p.member && !p.ambiguous);
    assert!(p.probes.iter().all(|pr| pr.pass));
}

#[test]
fn cap_tangential_direction_is_not_a_normal() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let (x, _) = cap_boundary(&m, 0.0);
    let t = from_ambient(&m, &x, &[0.0, 1.0, 0.0]);
    let r = is_normal_definition(&m, &s, &x, &t, ConeMode::General, &ConeOptions::default()).unwrap();
    assert!(!r.member);
    let y = r.witness_y.expect("witness");
    let w = m.log_map(&x, &y).unwrap();
    assert!(m.inner(&x, &t.components, &w.components) > 0.0);
    assert!(!is_normal_projection(&m, &s, &x, &t, 0.75).unwrap().member);
}

#[test]
fn zero_vector_is_a_member() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let (x, _) = cap_boundary(&m, 1.0);
    let r = is_normal_definition(&m, &s, &x, &TangentVector::zero(&x), ConeMode::General, &ConeOptions::default()).unwrap();
    assert!(r.member);
    assert_eq!(r.sigma, Some(0.0));
    assert!(is_normal_projection(&m, &s, &x, &TangentVector::zero(&x), 0.75).unwrap().member);
}

#[test]
fn inward_direction_fails_the_projection_test() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let (x, v) = cap_boundary(&m, 2.0);
    let r = is_normal_projection(&m, &s, &x, &v.scaled(-1.0), 0.75).unwrap();
    assert!(!r.member);
    assert!(r.probes.iter().all(|p| p.value == 0.0));
}

#[test]
fn arc_endpoint_admits_directions_beyond_the_arc() {
    let m = Manifold::sphere();
    let arc = equator_arc(&m, 1.0);
    let x = sphere_point(&m, 0.0, 0.5);
    // Beyond the arc: the longitude direction, tilted by 0.6 rad towards the pole.
    let v = from_ambient(&m, &x, &[-0.5f64.sin() * 0.6f64.cos(), 0.5f64.cos() * 0.6f64.cos(), 0.6f64.sin()]);
    assert!(is_normal_projection(&m, &arc, &x, &v, 0.75).unwrap().member);
}

#[test]
fn accepted_cap_normal_separates_the_whole_cap() {
    use rand::{Rng, SeedableRng};
    let m = Manifold::sphere();
    let s = cap(&m);
    let (x, v) = cap_boundary(&m, -0.7);
    assert!(is_normal_definition(&m, &s, &x, &v, ConeMode::Convex, &ConeOptions::default()).unwrap().member);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    for _ in 0..2000 {
        let theta = FRAC_PI_3 * rng.random::<f64>().sqrt();
        let y = sphere_point(&m, std::f64::consts::FRAC_PI_2 - theta, rng.random::<f64>() * std::f64::consts::TAU);
        let w = m.log_map(&x, &y).unwrap();
        assert!(m.inner(&x, &v.components, &w.components) <= 1e-9);
    }
}

#[test]
fn nonzero_normal_recovers_the_analytic_normals() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let (x, v) = cap_boundary(&m, 0.9);
    let n = nonzero_normal(&m, &s, &x, &NormalOptions::default()).unwrap();
    assert!(m.angle(&x, &n.components, &v.components) < 1e-3);

    let mp = Manifold::paraboloid();
    let par = paraboloid_sublevel(&mp, 0.5);
    for x in par.boundary_sample(&mp, 5, 4).unwrap() {
        let n = nonzero_normal(&mp, &par, &x, &NormalOptions::default()).unwrap();
        let g = mp.gradient(&ScalarField::EmbeddingCoordinate(2), &x).unwrap();
        assert!(mp.angle(&x, &n.components, &g.components) < 1e-2);
    }

    let e = Manifold::euclidean(2);
    let hp = half_plane(&e);
    let x = proxgeo_core::Point::new(0, &[0.7, 0.0]);
    let n = nonzero_normal(&e, &hp, &x, &NormalOptions::default()).unwrap();
    assert!((n.components[1] - 1.0).abs() < 1e-9 && n.components[0].abs() < 1e-6);
}

#[test]
fn nonzero_normal_succeeds_on_boundary_samples() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let pts = s.boundary_sample(&m, 50, 8).unwrap();
    for (i, x) in pts.iter().enumerate() {
        let opts = NormalOptions { seed: i as u64, ..NormalOptions::default() };
        assert!(nonzero_normal(&m, &s, x, &opts).is_ok());
    }
    let mp = Manifold::paraboloid();
    let par = paraboloid_sublevel(&mp, 0.5);
    for (i, x) in par.boundary_sample(&mp, 50, 8).unwrap().iter().enumerate() {
        let opts = NormalOptions { seed: i as u64, ..NormalOptions::default() };
        assert!(nonzero_normal(&mp, &par, x, &opts).is_ok());
    }
}

#[test]
fn level_set_check_examples() {
    let m = Manifold::sphere();
    let f = ScalarField::EmbeddingCoordinate(2);
    let (x, v) = cap_boundary(&m, 0.3);
    let g = m.gradient(&f, &x).unwrap();
    assert!(level_set_cone_check(&m, &f, 0.5, &x, &g).unwrap());
    assert!(level_set_cone_check(&m, &f, 0.5, &x, &v).unwrap());
    let e = m.orthonormal_frame(&x, Some(&g.components));
    let tilted = TangentVector::new(x.clone(), e.column(0) * 0.1f64.cos() + e.column(1) * 0.1f64.sin());
    assert!(!level_set_cone_check(&m, &f, 0.5, &x, &tilted).unwrap());
    let np = m.point_from_embedding(&[0.0, 0.0, 1.0]).unwrap();
    assert!(matches!(level_set_cone_check(&m, &f, 1.0, &np, &g), Err(GeoError::ZeroGradient)));
}

#[test]
fn too_few_samples_is_reported() {
    let m = Manifold::sphere();
    let s = cap(&m);
    let (x, v) = cap_boundary(&m, 0.0);
    let opts = ConeOptions { samples: Some(50), ..ConeOptions::default() };
    assert!(matches!(
        is_normal_definition(&m, &s, &x, &v, ConeMode::General, &opts),
        Err(GeoError::SamplingFailure { .. })
    ));
}

fn level_circle(m: &Manifold) -> ConvexSet {
    let np = m.point_from_embedding(&[0.0, 0.0, 1.0]).unwrap();
    ConvexSet::level_set(m, ScalarField::EmbeddingCoordinate(2), 0.5, Region { center: np, radius: 1.5 }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn cone_membership_is_scale_invariant(lon in 0.0f64..6.28, tilt in -1.5f64..1.5) {
        let m = Manifold::sphere();
        let s = cap(&m);
        let (x, v) = cap_boundary(&m, lon);
        let e = m.orthonormal_frame(&x, Some(&v.components));
        let u = TangentVector::new(x.clone(), e.column(0) * tilt.cos() + e.column(1) * tilt.sin());
        let samples = ConeSamples::draw(&m, &s, &x, &ConeOptions::default()).unwrap();
        let base = samples.test(&m, &u, ConeMode::General);
        for lambda in [0.5, 2.0, 10.0] {
            let r = samples.test(&m, &u.scaled(lambda), ConeMode::General);
            prop_assert_eq!(r.member, base.member);
        }
    }

    #[test]
    fn level_set_normals_are_gradient_directions(lon in 0.0f64..6.28, pick in 0usize..4) {
        let m = Manifold::sphere();
        let s = level_circle(&m);
        let f = ScalarField::EmbeddingCoordinate(2);
        let (x, _) = cap_boundary(&m, lon);
        let g = m.gradient(&f, &x).unwrap();
        let e = m.orthonormal_frame(&x, Some(&g.components));
        // Exact ± gradient, or rotated away from it by at least 0.3 rad.
        let angle = [0.0, std::f64::consts::PI, 0.3, 1.2][pick];
        let v = TangentVector::new(x.clone(), e.column(0) * angle.cos() + e.column(1) * angle.sin());
        let r = is_normal_definition(&m, &s, &x, &v, ConeMode::General, &ConeOptions::default()).unwrap();
        if r.member {
            prop_assert!(level_set_cone_check(&m, &f, 0.5, &x, &v).unwrap());
        }
        prop_assert_eq!(r.member, pick < 2);
    }
}
