//! Concavity of `d_S` along the transported segment direction.

use crate::manifold::{Manifold, Point, TangentVector};
use crate::prelude::*;
use crate::{ConvexSet, GeoError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessOptions {
    pub step: f64,
    pub s_max: f64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        Self { step: 1e-2, s_max: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConcavityWitness {
    /// `x* = proj_S x`.
    pub foot: Point,
    /// `v = l_{x*x} γ̇`, unit, at `x`.
    pub direction: TangentVector,
    pub s: Vec<f64>,
    /// `d_S(exp_x(s v))`.
    pub profile: Vec<f64>,
    pub first_difference: f64,
    pub second_difference: f64,
    /// Largest second-difference quotient on `|s| ≤ s_max`.
    pub max_second_difference: f64,
    pub critical: bool,
    pub strict_max: bool,
    pub concave: bool,
}

impl ConcavityWitness {
    pub fn accepted(&self) -> bool {
        self.critical && self.strict_max && self.concave
    }
}

/// Profile of `d_S` along `α(s) = exp_x(s v)` for a segment `S`, where `v`
/// is the segment direction at `proj_S x` transported to `x`.
pub fn concavity_witness(m: &Manifold, set: &ConvexSet, x: &Point, opts: &WitnessOptions) -> Result<ConcavityWitness> {
    let (p, _, vel, _) = set.segment_data().ok_or(GeoError::NotAGeodesicBoundary)?;
    let res = set.project(m, x)?;
    if res.value <= m.tol.segment_membership {
        return Err(GeoError::InvalidInput("x lies on S".into()));
    }
    let foot = res.minimizers[0].clone();
    let sigma = set.segment_parameter(m, &foot)?;
    let mut s = m.transport_along(p, vel, &[], &[sigma])?;
    let sample = s.pop().expect("one sample").0;
    let tangent = m.express_at(&TangentVector::new(sample.point, sample.velocity), &foot)?;
    let tangent = m.normalize(&tangent).ok_or(GeoError::NotAGeodesicBoundary)?;
    let direction = m.transport_between(&tangent, x)?;
    let direction = m.normalize(&direction).ok_or(GeoError::NonFiniteState)?;

    let h = opts.step;
    let k = (opts.s_max / h).round().max(2.0) as i64;
    let s: Vec<f64> = (-k..=k).map(|i| i as f64 * h).collect();
    let mut profile = Vec::with_capacity(s.len());
    for &si in &s {
        let y = m.exp(&direction.scaled(si))?;
        profile.push(set.distance(m, &y)?);
    }
    let c = k as usize;
    let first_difference = (profile[c + 1] - profile[c - 1]) / (2.0 * h);
    let second = |i: usize| (profile[i + 1] - 2.0 * profile[i] + profile[i - 1]) / (h * h);
    let second_difference = second(c);
    let max_second_difference = (1..profile.len() - 1).map(second).fold(f64::NEG_INFINITY, f64::max);
    Ok(ConcavityWitness {
        foot,
        direction,
        s,
        profile,
        first_difference,
        second_difference,
        max_second_difference,
        critical: first_difference.abs() <= 1e-4,
        strict_max: second_difference <= -1e-6,
        concave: max_second_difference <= 1e-7,
    })
}
