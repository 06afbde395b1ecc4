//! Signed distance to `W = bd S` and the scalar second fundamental form.

use crate::manifold::{Manifold, Point, TangentVector};
use crate::prelude::*;
use crate::sets::field_gradient;
use crate::{ConvexSet, GeoError, Result, ScalarField, SetSpec};

/// `φ = −d_W` inside `S` (the side of the inward normal) and `+d_W` outside.
///
/// With this orientation `∇φ = −n` on `W` and the Hessian of `φ` restricted
/// to `T_xW` is the second fundamental form `h_x`.
#[derive(Debug, Clone)]
pub struct SignedDistanceField {
    set: Arc<ConvexSet>,
}

impl SignedDistanceField {
    /// Accepts balls and sublevel sets; checks the inward normal on boundary samples.
    pub fn new(m: &Manifold, set: Arc<ConvexSet>) -> Result<Self> {
        match &set.spec {
            SetSpec::GeodesicBall { .. } | SetSpec::Sublevel { .. } => {}
            _ => return Err(GeoError::InvalidInput("signed distance needs a ball or a sublevel set".into())),
        }
        let sdf = Self { set };
        let probe = 1e-3;
        for x in sdf.set.boundary_sample(m, 8, 0x0e1e)? {
            let n = sdf.inward_normal(m, &x)?;
            let inside = m.exp(&n.scaled(probe))?;
            let outside = m.exp(&n.scaled(-probe))?;
            if sdf.set.excess(m, &inside)? >= 0.0 || sdf.set.excess(m, &outside)? <= 0.0 {
                return Err(GeoError::OrientationFailure);
            }
        }
        Ok(sdf)
    }

    pub(crate) fn new_unchecked(set: Arc<ConvexSet>) -> Self {
        Self { set }
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    /// Unit inward normal `n(x)`; defined off the boundary as well.
    pub fn inward_normal(&self, m: &Manifold, x: &Point) -> Result<TangentVector> {
        let v = match &self.set.spec {
            SetSpec::GeodesicBall { center, .. } => m.log_map(x, center)?,
            SetSpec::Sublevel { field, .. } => TangentVector::new(x.clone(), -field_gradient(m, field, x)?),
            _ => return Err(GeoError::OrientationFailure),
        };
        m.normalize(&v).ok_or(GeoError::OrientationFailure)
    }

    pub fn eval(&self, m: &Manifold, p: &Point) -> Result<f64> {
        match &self.set.spec {
            SetSpec::GeodesicBall { center, radius } => Ok(m.distance(center, p)? - radius),
            SetSpec::Sublevel { .. } => {
                if self.set.contains(m, p)? {
                    Ok(-self.set.project_boundary(m, p, None)?.value)
                } else {
                    Ok(self.set.project(m, p)?.value)
                }
            }
            _ => Err(GeoError::OrientationFailure),
        }
    }

    pub fn as_field(&self) -> ScalarField {
        let sdf = self.clone();
        ScalarField::custom(move |m, p| sdf.eval(m, p))
    }
}

/// `h_x(v, w) = ⟨∇_v(−n), w⟩` on `T_x W`, in an orthonormal tangent basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondFundamentalForm {
    pub base: Point,
    /// Orthonormal basis of `T_x W` in coordinates.
    pub tangent_basis: Vec<DVector<f64>>,
    pub matrix: DMatrix<f64>,
    /// `v ↦ ∇_v(−n)` in coordinates.
    pub shape: DMatrix<f64>,
}

impl SecondFundamentalForm {
    pub fn eval(&self, m: &Manifold, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        m.inner(&self.base, &(&self.shape * v), w)
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        crate::manifold::sorted_eigenvalues(&self.matrix).first().copied().unwrap_or(0.0)
    }
}

/// Second fundamental form of `bd S` at `x` by central differences of the
/// outward normal field.
pub fn second_fundamental_form(m: &Manifold, sdf: &SignedDistanceField, x: &Point) -> Result<SecondFundamentalForm> {
    let n = m.dim();
    let outward = |p: &Point| -> Result<DVector<f64>> { Ok(-sdf.inward_normal(m, p)?.components) };
    let nx = outward(x)?;
    let gamma = m.christoffel(x);
    let mut shape = DMatrix::zeros(n, n);
    for i in 0..n {
        let h = 1e-5 * x.coords[i].abs().max(1.0);
        let mut xp = x.clone();
        xp.coords[i] += h;
        let mut xm = x.clone();
        xm.coords[i] -= h;
        let d = (outward(&xp)? - outward(&xm)?) / (2.0 * h);
        for k in 0..n {
            let mut acc = d[k];
            for j in 0..n {
                acc += gamma[k * n * n + i * n + j] * nx[j];
            }
            shape[(k, i)] = acc;
        }
    }
    let frame = m.orthonormal_frame(x, Some(&nx));
    let tangent_basis: Vec<DVector<f64>> = (1..n).map(|i| frame.column(i).into_owned()).collect();
    let k = tangent_basis.len();
    let mut matrix = DMatrix::zeros(k, k);
    for a in 0..k {
        let sa = &shape * &tangent_basis[a];
        for b in 0..k {
            matrix[(a, b)] = m.inner(x, &sa, &tangent_basis[b]);
        }
    }
    Ok(SecondFundamentalForm { base: x.clone(), tangent_basis, matrix, shape })
}
