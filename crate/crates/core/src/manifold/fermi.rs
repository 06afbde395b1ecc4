//! Fermi coordinates `Γ(t, x) = exp_{γ(t)}(Σ x_i e_i(t))` along a geodesic.

use super::{GeodesicPath, Manifold, Point, TangentVector};
use crate::prelude::*;
use crate::{GeoError, Result};

/// Fermi chart along a unit-speed geodesic, valid for `‖x‖ < mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct FermiChart {
    pub start: Point,
    /// Unit initial velocity.
    pub velocity: DVector<f64>,
    pub length: f64,
    /// Orthonormal complement of the velocity at the start.
    pub normals: Vec<DVector<f64>>,
    pub mu: f64,
}

/// Frame of the Fermi chart at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct FermiFrame {
    pub point: Point,
    pub velocity: DVector<f64>,
    pub normals: Vec<DVector<f64>>,
}

impl FermiChart {
    /// Builds the chart and finds its radius by bisection on round-trip
    /// accuracy and invertibility of the numerical Jacobian.
    pub fn new(m: &Manifold, path: &GeodesicPath) -> Result<Self> {
        let mut chart = Self::with_radius(m, path, 0.0)?;
        let r0 = m.convexity_radius(&path.start)?.min(2.0) * 0.5;
        if chart.valid_at(m, r0) {
            chart.mu = r0;
            return Ok(chart);
        }
        let (mut lo, mut hi) = (0.0, r0);
        for _ in 0..12 {
            let mid = 0.5 * (lo + hi);
            if chart.valid_at(m, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-3 {
                break;
            }
        }
        if lo < 1e-3 {
            return Err(GeoError::TubeTooNarrow);
        }
        chart.mu = lo;
        Ok(chart)
    }

    /// Chart with a caller-chosen radius (no validation).
    pub fn with_radius(m: &Manifold, path: &GeodesicPath, mu: f64) -> Result<Self> {
        let speed = m.inner(&path.start, &path.initial_velocity, &path.initial_velocity).sqrt();
        if speed == 0.0 {
            return Err(GeoError::InvalidInput("constant geodesic".into()));
        }
        let velocity = &path.initial_velocity / speed;
        let frame = m.orthonormal_frame(&path.start, Some(&velocity));
        let normals = (1..m.dim()).map(|i| frame.column(i).into_owned()).collect();
        Ok(Self { start: path.start.clone(), velocity, length: speed * path.t_end.abs(), normals, mu })
    }

    pub fn frame_at(&self, m: &Manifold, t: f64) -> Result<FermiFrame> {
        let mut s = m.transport_along(&self.start, &self.velocity, &self.normals, &[t])?;
        let (sample, normals) = s.pop().expect("one sample");
        Ok(FermiFrame { point: sample.point, velocity: sample.velocity, normals })
    }

    /// `Γ(t, x)`.
    pub fn map(&self, m: &Manifold, t: f64, x: &[f64]) -> Result<Point> {
        let fr = self.frame_at(m, t)?;
        Self::map_in_frame(m, &fr, x)
    }

    pub fn map_in_frame(m: &Manifold, fr: &FermiFrame, x: &[f64]) -> Result<Point> {
        let mut v = DVector::zeros(m.dim());
        for (xi, e) in x.iter().zip(&fr.normals) {
            v += e * *xi;
        }
        m.exp(&TangentVector::new(fr.point.clone(), v))
    }

    /// `Γ⁻¹(y) = (t, x)`: foot on the geodesic, then normal components of the log.
    pub fn inverse(&self, m: &Manifold, y: &Point) -> Result<(f64, DVector<f64>)> {
        self.inverse_from(m, y, 0.5 * self.length)
    }

    pub fn inverse_from(&self, m: &Manifold, y: &Point, t_guess: f64) -> Result<(f64, DVector<f64>)> {
        let along = |t: f64| -> Result<(f64, FermiFrame, DVector<f64>)> {
            let fr = self.frame_at(m, t)?;
            let l = m.log_map(&fr.point, y)?.components;
            let c = m.inner(&fr.point, &l, &fr.velocity);
            Ok((c, fr, l))
        };
        let mut t = t_guess;
        let (mut c, mut fr, mut l) = along(t)?;
        let mut prev: Option<(f64, f64)> = None;
        for _ in 0..60 {
            if c.abs() <= 1e-12 {
                break;
            }
            let step = match prev {
                Some((tp, cp)) if (c - cp).abs() > 1e-300 => {
                    let slope = (c - cp) / (t - tp);
                    if slope < -0.2 { -c / slope } else { c }
                }
                _ => c,
            };
            prev = Some((t, c));
            t += step;
            (c, fr, l) = along(t)?;
        }
        if c.abs() > 1e-9 {
            return Err(GeoError::NoConvergence("fermi foot"));
        }
        let x = DVector::from_iterator(fr.normals.len(), fr.normals.iter().map(|e| m.inner(&fr.point, &l, e)));
        Ok((t, x))
    }

    /// Round trip within `1e-6` and a well-conditioned Jacobian at radius `mu`.
    pub fn valid_at(&self, m: &Manifold, mu: f64) -> bool {
        let k = self.normals.len();
        let mut dirs: Vec<DVector<f64>> = Vec::new();
        for i in 0..k {
            let mut d = DVector::zeros(k);
            d[i] = 1.0;
            dirs.push(d.clone());
            dirs.push(-d);
        }
        for t in [0.0, 0.5 * self.length, self.length] {
            for d in &dirs {
                let x = d * mu;
                if !self.check_point(m, t, x.as_slice()) {
                    return false;
                }
            }
        }
        true
    }

    fn check_point(&self, m: &Manifold, t: f64, x: &[f64]) -> bool {
        let Ok(y) = self.map(m, t, x) else { return false };
        let Ok((t2, x2)) = self.inverse_from(m, &y, t) else { return false };
        let err = (t2 - t).abs().max(x.iter().zip(x2.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        if err > 1e-6 {
            return false;
        }
        let pos = |p: &Point| m.embed(p).or_else(|| m.to_chart(p, y.chart).ok().map(|q| q.coords));
        // Jacobian of the chart map (embedded when possible) by central differences.
        let h = 1e-5;
        let n = m.dim();
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut params: Vec<f64> = core::iter::once(t).chain(x.iter().copied()).collect();
        for j in 0..n {
            let base = params[j];
            params[j] = base + h;
            let p1 = self.map(m, params[0], &params[1..]).ok().and_then(|p| pos(&p));
            params[j] = base - h;
            let p2 = self.map(m, params[0], &params[1..]).ok().and_then(|p| pos(&p));
            params[j] = base;
            match (p1, p2) {
                (Some(a), Some(b)) => cols.push((a - b) / (2.0 * h)),
                _ => return false,
            }
        }
        let jac = DMatrix::from_columns(&cols);
        let gram = jac.transpose() * &jac;
        let scale: f64 = cols.iter().map(|c| c.norm_squared()).product();
        scale > 0.0 && gram.determinant() / scale > 1e-6
    }
}
