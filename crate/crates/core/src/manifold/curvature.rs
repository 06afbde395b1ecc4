//! Riemann tensor, sectional curvature, curvature bounds, convexity radius.

use super::{Manifold, Point, RadiusHint, TangentVector};
use crate::prelude::*;
use crate::{GeoError, Result};

/// Upper bound on sectional curvature over a region.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CurvatureBound {
    /// `δ > 0`, margin included.
    Positive(f64),
    /// Curvature is nowhere positive on the samples.
    NonPositive,
}

impl CurvatureBound {
    pub fn delta(&self) -> Option<f64> {
        match self {
            CurvatureBound::Positive(d) => Some(*d),
            CurvatureBound::NonPositive => None,
        }
    }

    /// `π / (2√δ)`, or infinity when the bound is non-positive.
    pub fn half_conjugate_radius(&self) -> f64 {
        match self {
            CurvatureBound::Positive(d) => core::f64::consts::PI / (2.0 * d.sqrt()),
            CurvatureBound::NonPositive => f64::INFINITY,
        }
    }
}

impl Manifold {
    /// Riemann tensor `R^l_{kij}` at `p`, stored at `[((l*n + k)*n + i)*n + j]`,
    /// so that `(R(X,Y)Z)^l = R^l_{kij} X^i Y^j Z^k`.
    pub fn riemann(&self, p: &Point) -> Vec<f64> {
        let n = self.dim();
        let n2 = n * n;
        let n3 = n2 * n;
        let gamma = self.christoffel(p);
        let mut dgamma = vec![0.0; n * n3];
        let mut x = p.coords.clone();
        let mut gp = vec![0.0; n3];
        let mut gm = vec![0.0; n3];
        for i in 0..n {
            let h = self.tol.fd_curvature_step * p.coords[i].abs().max(1.0);
            x[i] = p.coords[i] + h;
            self.geometry().christoffel(p.chart, x.as_slice(), &mut gp);
            x[i] = p.coords[i] - h;
            self.geometry().christoffel(p.chart, x.as_slice(), &mut gm);
            x[i] = p.coords[i];
            for a in 0..n3 {
                dgamma[i * n3 + a] = (gp[a] - gm[a]) / (2.0 * h);
            }
        }
        // Γ^l_{ab} at gamma[l*n2 + a*n + b]; ∂_i Γ^l_{ab} at dgamma[i*n3 + l*n2 + a*n + b].
        let mut r = vec![0.0; n * n3];
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut v = dgamma[i * n3 + l * n2 + j * n + k] - dgamma[j * n3 + l * n2 + i * n + k];
                        for m in 0..n {
                            v += gamma[l * n2 + i * n + m] * gamma[m * n2 + j * n + k]
                                - gamma[l * n2 + j * n + m] * gamma[m * n2 + i * n + k];
                        }
                        r[((l * n + k) * n + i) * n + j] = v;
                    }
                }
            }
        }
        r
    }

    /// `R(X, Y)Z` from a precomputed tensor.
    pub fn apply_riemann(r: &[f64], x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let n = x.len();
        let mut out = DVector::zeros(n);
        for l in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        acc += r[((l * n + k) * n + i) * n + j] * x[i] * y[j] * z[k];
                    }
                }
            }
            out[l] = acc;
        }
        out
    }

    /// `K(v, w) = ⟨R(v,w)w, v⟩ / (‖v‖²‖w‖² − ⟨v,w⟩²)`.
    pub fn sectional_curvature(&self, p: &Point, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        let r = self.riemann(p);
        self.sectional_from_tensor(p, &r, v, w)
    }

    pub(crate) fn sectional_from_tensor(
        &self,
        p: &Point,
        r: &[f64],
        v: &DVector<f64>,
        w: &DVector<f64>,
    ) -> Result<f64> {
        let vv = self.inner(p, v, v);
        let ww = self.inner(p, w, w);
        let vw = self.inner(p, v, w);
        if vv <= 0.0 || ww <= 0.0 {
            return Err(GeoError::DegeneratePlane);
        }
        let gram = vv * ww - vw * vw;
        if gram / (vv * ww) < 1e-12 {
            return Err(GeoError::DegeneratePlane);
        }
        let rw = Self::apply_riemann(r, v, w, w);
        Ok(self.inner(p, &rw, v) / gram)
    }

    /// Largest sectional curvature over the samples, with the profile's margin.
    ///
    /// In dimension 2 there is a single plane per point; otherwise the planes
    /// spanned by pairs of frame vectors and by `(e_i + e_j)/√2, e_k` are used.
    pub fn curvature_upper_bound(&self, samples: &[Point]) -> Result<CurvatureBound> {
        if samples.is_empty() {
            return Err(GeoError::InvalidInput("no curvature samples".into()));
        }
        let n = self.dim();
        if n < 2 {
            return Ok(CurvatureBound::NonPositive);
        }
        let mut kmax = f64::NEG_INFINITY;
        for p in samples {
            let r = self.riemann(p);
            let e = self.orthonormal_frame(p, None);
            let cols: Vec<DVector<f64>> = (0..n).map(|i| e.column(i).into_owned()).collect();
            let mut planes: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    planes.push((cols[i].clone(), cols[j].clone()));
                    for k in 0..n {
                        if k != i && k != j {
                            planes.push(((&cols[i] + &cols[j]) / 2f64.sqrt(), cols[k].clone()));
                        }
                    }
                }
            }
            for (a, b) in planes {
                kmax = kmax.max(self.sectional_from_tensor(p, &r, &a, &b)?);
            }
        }
        Ok(if kmax > 1e-9 {
            CurvatureBound::Positive(kmax * (1.0 + self.tol.curvature_margin))
        } else {
            CurvatureBound::NonPositive
        })
    }

    /// Curvature bound from the manifold hint, or estimated on a small
    /// coordinate stencil around `p`.
    pub fn local_curvature_bound(&self, p: &Point, radius: f64) -> Result<CurvatureBound> {
        if let Some(d) = self.curvature_bound_hint {
            return Ok(if d > 0.0 { CurvatureBound::Positive(d) } else { CurvatureBound::NonPositive });
        }
        self.curvature_upper_bound(&self.ball_samples(p, radius))
    }

    /// `p` plus points at geodesic distance `radius` along ± frame directions.
    pub(crate) fn ball_samples(&self, p: &Point, radius: f64) -> Vec<Point> {
        let mut pts = vec![p.clone()];
        let e = self.orthonormal_frame(p, None);
        for i in 0..self.dim() {
            for sgn in [-1.0, 1.0] {
                for frac in [0.5, 1.0] {
                    let v = TangentVector::new(p.clone(), e.column(i) * (sgn * frac * radius));
                    if let Ok(q) = self.exp(&v) {
                        pts.push(q);
                    }
                }
            }
        }
        pts
    }

    /// Convexity-radius estimate `r(x)`: the hint if present, else
    /// `min(inj/2, π/(2√δ))`, falling back to the working radius when both
    /// terms are unbounded.
    pub fn convexity_radius(&self, p: &Point) -> Result<f64> {
        if let Some(h) = &self.convexity_radius_hint {
            return Ok(match h {
                RadiusHint::Constant(r) => *r,
                RadiusHint::Function(f) => f(p),
            });
        }
        let inj = self.injectivity_radius();
        let half_inj = if inj > 0.0 { inj / 2.0 } else { f64::INFINITY };
        let probe = if half_inj.is_finite() { half_inj } else { self.geometry().working_radius() };
        let curv = self.local_curvature_bound(p, probe.min(0.5))?.half_conjugate_radius();
        let r = half_inj.min(curv);
        Ok(if r.is_finite() { r } else { self.geometry().working_radius() })
    }
}
