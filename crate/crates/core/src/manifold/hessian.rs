//! Gradients and Hessians of scalar fields by finite differences.

use super::{BilinearForm, Manifold, Point, TangentVector};
use crate::prelude::*;
use crate::{GeoError, Result, ScalarField};

impl Manifold {
    fn shifted(&self, p: &Point, offsets: &[(usize, f64)]) -> Point {
        let mut q = p.clone();
        for &(i, h) in offsets {
            q.coords[i] += h;
        }
        q
    }

    fn eval_finite(&self, f: &ScalarField, p: &Point) -> Result<f64> {
        let v = f.eval(self, p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GeoError::NonFiniteState)
        }
    }

    /// Coordinate differential `∂_i f(p)` by central differences.
    pub fn differential(&self, f: &ScalarField, p: &Point) -> Result<DVector<f64>> {
        let n = self.dim();
        let mut d = DVector::zeros(n);
        for i in 0..n {
            let h = self.tol.fd_gradient_step * p.coords[i].abs().max(1.0);
            let fp = self.eval_finite(f, &self.shifted(p, &[(i, h)]))?;
            let fm = self.eval_finite(f, &self.shifted(p, &[(i, -h)]))?;
            d[i] = (fp - fm) / (2.0 * h);
        }
        Ok(d)
    }

    /// Riemannian gradient `g^{ij} ∂_j f`.
    pub fn gradient(&self, f: &ScalarField, p: &Point) -> Result<TangentVector> {
        let d = self.differential(f, p)?;
        self.raise(p, &d)
    }

    /// Raises a covector with the inverse metric.
    pub fn raise(&self, p: &Point, covector: &DVector<f64>) -> Result<TangentVector> {
        let v = self.metric(p).cholesky().ok_or(GeoError::NonFiniteState)?.solve(covector);
        Ok(TangentVector::new(p.clone(), v))
    }

    /// Covariant Hessian `∂_i∂_j f − Γ^k_ij ∂_k f` in coordinates.
    pub fn hessian(&self, f: &ScalarField, p: &Point) -> Result<BilinearForm> {
        self.hessian_with_step(f, p, self.tol.fd_hessian_step)
    }

    /// [`Manifold::hessian`] with an explicit relative step, for fields whose
    /// values carry solver noise.
    pub fn hessian_with_step(&self, f: &ScalarField, p: &Point, step: f64) -> Result<BilinearForm> {
        let n = self.dim();
        let f0 = self.eval_finite(f, p)?;
        let hs: Vec<f64> = (0..n).map(|i| step * p.coords[i].abs().max(1.0)).collect();
        let mut d2 = DMatrix::zeros(n, n);
        let mut d1 = DVector::zeros(n);
        for i in 0..n {
            let fp = self.eval_finite(f, &self.shifted(p, &[(i, hs[i])]))?;
            let fm = self.eval_finite(f, &self.shifted(p, &[(i, -hs[i])]))?;
            d2[(i, i)] = (fp - 2.0 * f0 + fm) / (hs[i] * hs[i]);
            d1[i] = (fp - fm) / (2.0 * hs[i]);
        }
        for i in 0..n {
            for j in i + 1..n {
                let fpp = self.eval_finite(f, &self.shifted(p, &[(i, hs[i]), (j, hs[j])]))?;
                let fpm = self.eval_finite(f, &self.shifted(p, &[(i, hs[i]), (j, -hs[j])]))?;
                let fmp = self.eval_finite(f, &self.shifted(p, &[(i, -hs[i]), (j, hs[j])]))?;
                let fmm = self.eval_finite(f, &self.shifted(p, &[(i, -hs[i]), (j, -hs[j])]))?;
                let v = (fpp - fpm - fmp + fmm) / (4.0 * hs[i] * hs[j]);
                d2[(i, j)] = v;
                d2[(j, i)] = v;
            }
        }
        let gamma = self.christoffel(p);
        let mut h = d2;
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += gamma[k * n * n + i * n + j] * d1[k];
                }
                h[(i, j)] -= acc;
            }
        }
        Ok(BilinearForm { base: p.clone(), matrix: h })
    }

    /// Hessian from second differences of `f ∘ exp_p` in an orthonormal frame.
    ///
    /// Returned in coordinates, like [`Manifold::hessian`].
    pub fn hessian_normal(&self, f: &ScalarField, p: &Point) -> Result<BilinearForm> {
        let n = self.dim();
        let e = self.orthonormal_frame(p, None);
        let h = self.tol.fd_hessian_step;
        let at = |a: &[(usize, f64)]| -> Result<f64> {
            let mut v = DVector::zeros(n);
            for &(i, s) in a {
                v += e.column(i) * s;
            }
            let q = self.exp(&TangentVector::new(p.clone(), v))?;
            self.eval_finite(f, &q)
        };
        let f0 = at(&[])?;
        let mut hn = DMatrix::zeros(n, n);
        for i in 0..n {
            hn[(i, i)] = (at(&[(i, h)])? - 2.0 * f0 + at(&[(i, -h)])?) / (h * h);
            for j in 0..i {
                let v = (at(&[(i, h), (j, h)])? - at(&[(i, h), (j, -h)])? - at(&[(i, -h), (j, h)])?
                    + at(&[(i, -h), (j, -h)])?)
                    / (4.0 * h * h);
                hn[(i, j)] = v;
                hn[(j, i)] = v;
            }
        }
        // E^{-1} = Eᵀ g, so the coordinate matrix is (g E) Hn (g E)ᵀ.
        let ge = self.metric(p) * e;
        Ok(BilinearForm { base: p.clone(), matrix: &ge * hn * ge.transpose() })
    }
}
