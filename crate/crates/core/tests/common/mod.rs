#![allow(dead_code)]

use std::f64::consts::FRAC_PI_3;
use std::sync::Arc;

use nalgebra::DVector;
use proxgeo_core::sets::Region;
use proxgeo_core::{ConvexSet, Manifold, Point, ScalarField, TangentVector};

/// Tangent components of an ambient vector at `p`.
pub fn from_ambient(m: &Manifold, p: &Point, e: &[f64]) -> TangentVector {
    let j = m.embedding_jacobian(p).unwrap();
    let e = DVector::from_column_slice(e);
    let a = (j.transpose() * &j).cholesky().unwrap().solve(&(j.transpose() * e));
    TangentVector::new(p.clone(), a)
}

pub fn to_ambient(m: &Manifold, v: &TangentVector) -> DVector<f64> {
    m.embedding_jacobian(&v.base).unwrap() * &v.components
}

pub fn sphere_point(m: &Manifold, lat: f64, lon: f64) -> Point {
    m.point_from_embedding(&[lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]).unwrap()
}

/// `{z ≥ 1/2}` on the unit sphere.
pub fn cap(m: &Manifold) -> Arc<ConvexSet> {
    let np = m.point_from_embedding(&[0.0, 0.0, 1.0]).unwrap();
    Arc::new(ConvexSet::ball(m, np, FRAC_PI_3).unwrap())
}

/// Boundary point of the cap at longitude `lon` and its outward meridian direction.
pub fn cap_boundary(m: &Manifold, lon: f64) -> (Point, TangentVector) {
    let x = sphere_point(m, FRAC_PI_3 / 2.0, lon);
    let s = 3f64.sqrt() / 2.0;
    let v = from_ambient(m, &x, &[0.5 * lon.cos(), 0.5 * lon.sin(), -s]);
    (x, v)
}

/// `{z ≤ z0}` on the paraboloid `z = x² + y²`.
pub fn paraboloid_sublevel(m: &Manifold, z0: f64) -> Arc<ConvexSet> {
    let region = Region { center: Point::new(0, &[0.0, 0.0]), radius: 2.0 };
    Arc::new(ConvexSet::sublevel(m, ScalarField::EmbeddingCoordinate(2), z0, region).unwrap())
}

/// Equator arc of length `len` centered at `(1, 0, 0)`.
pub fn equator_arc(m: &Manifold, len: f64) -> Arc<ConvexSet> {
    let a = sphere_point(m, 0.0, -0.5 * len);
    let b = sphere_point(m, 0.0, 0.5 * len);
    Arc::new(ConvexSet::segment(m, a, b).unwrap())
}

/// `{y ≤ 0}` in the Euclidean plane.
pub fn half_plane(m: &Manifold) -> Arc<ConvexSet> {
    let region = Region { center: Point::new(0, &[0.0, -1.0]), radius: 3.0 };
    let f = ScalarField::ChartCoordinate { chart: 0, index: 1 };
    Arc::new(ConvexSet::sublevel(m, f, 0.0, region).unwrap())
}
