//! Geodesic triangles and the spherical comparison residual.

use super::{Manifold, Point};
#[allow(unused_imports)]
use crate::prelude::*;
use crate::{GeoError, Result};

/// Sides and angles of a geodesic triangle. Side `a_len` is opposite `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleData {
    pub a: Point,
    pub b: Point,
    pub c: Point,
    pub a_len: f64,
    pub b_len: f64,
    pub c_len: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Manifold {
    /// Triangle data for `a, b, c` from the three pairwise logarithms.
    pub fn triangle(&self, a: &Point, b: &Point, c: &Point) -> Result<TriangleData> {
        let angle_at = |x: &Point, y: &Point, z: &Point| -> Result<(f64, f64, f64)> {
            let u = self.log_map(x, y)?.components;
            let w = self.log_map(x, z)?.components;
            let uu = self.inner(x, &u, &u);
            let ww = self.inner(x, &w, &w);
            let uw = self.inner(x, &u, &w);
            if uu <= 0.0 || ww <= 0.0 || 1.0 - uw * uw / (uu * ww) < 1e-12 {
                return Err(GeoError::DegenerateTriangle);
            }
            Ok(((uw / (uu * ww).sqrt()).clamp(-1.0, 1.0).acos(), uu.sqrt(), ww.sqrt()))
        };
        let (gamma, b_len, a_len) = angle_at(c, a, b)?;
        let (alpha, c_len, _) = angle_at(a, b, c)?;
        let (beta, _, _) = angle_at(b, a, c)?;
        Ok(TriangleData {
            a: a.clone(),
            b: b.clone(),
            c: c.clone(),
            a_len,
            b_len,
            c_len,
            alpha,
            beta,
            gamma,
        })
    }

    /// Triangle data and the comparison residual
    /// `ρ = cos(√δA)cos(√δB) + sin(√δA)sin(√δB)cos γ − cos(√δC)`.
    ///
    /// For `δ = 0` the residual is the flat limit `(C² − A² − B² + 2AB cos γ)/2`,
    /// the leading term of `ρ/δ`.
    pub fn triangle_comparison(&self, a: &Point, b: &Point, c: &Point, delta: f64) -> Result<(TriangleData, f64)> {
        let t = self.triangle(a, b, c)?;
        let rho = comparison_residual(t.a_len, t.b_len, t.c_len, t.gamma, delta);
        Ok((t, rho))
    }
}

pub(crate) fn comparison_residual(a: f64, b: f64, c: f64, gamma: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        return 0.5 * (c * c - a * a - b * b + 2.0 * a * b * gamma.cos());
    }
    let k = delta.sqrt();
    (k * a).cos() * (k * b).cos() + (k * a).sin() * (k * b).sin() * gamma.cos() - (k * c).cos()
}
