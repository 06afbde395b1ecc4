//! Scalar fields on a manifold.

use core::fmt;

use crate::manifold::{ChartId, Manifold, Point};
use crate::prelude::*;
use crate::sets::ConvexSet;
use crate::{GeoError, Result};

type CustomFn = dyn Fn(&Manifold, &Point) -> Result<f64> + Send + Sync;

/// A real function on a manifold.
#[derive(Clone)]
pub enum ScalarField {
    Constant(f64),
    /// The `i`-th coordinate of the embedding (the height `z` on the sphere).
    EmbeddingCoordinate(usize),
    /// The `index`-th coordinate of `chart` (points are converted first).
    ChartCoordinate { chart: ChartId, index: usize },
    /// `½ xᵀQx + bᵀx + c` in the coordinates of `chart`.
    ChartQuadratic { chart: ChartId, q: DMatrix<f64>, b: DVector<f64>, c: f64 },
    /// `d(·, center)`.
    Distance(Point),
    /// `d(·, center)²`.
    SquaredDistance(Point),
    /// `d_S`.
    DistanceToSet(Arc<ConvexSet>),
    /// `d_S²`.
    SquaredDistanceToSet(Arc<ConvexSet>),
    Scaled(f64, Box<ScalarField>),
    Sum(Vec<ScalarField>),
    Custom(Arc<CustomFn>),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(c) => write!(f, "Constant({c})"),
            ScalarField::EmbeddingCoordinate(i) => write!(f, "EmbeddingCoordinate({i})"),
            ScalarField::ChartCoordinate { chart, index } => write!(f, "ChartCoordinate({chart}, {index})"),
            ScalarField::ChartQuadratic { chart, .. } => write!(f, "ChartQuadratic(chart {chart})"),
            ScalarField::Distance(p) => write!(f, "Distance({:?})", p.coords.as_slice()),
            ScalarField::SquaredDistance(p) => write!(f, "SquaredDistance({:?})", p.coords.as_slice()),
            ScalarField::DistanceToSet(_) => f.write_str("DistanceToSet(..)"),
            ScalarField::SquaredDistanceToSet(_) => f.write_str("SquaredDistanceToSet(..)"),
            ScalarField::Scaled(s, g) => write!(f, "Scaled({s}, {g:?})"),
            ScalarField::Sum(v) => write!(f, "Sum({v:?})"),
            ScalarField::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl ScalarField {
    pub fn custom(f: impl Fn(&Manifold, &Point) -> Result<f64> + Send + Sync + 'static) -> Self {
        ScalarField::Custom(Arc::new(f))
    }

    pub fn scaled(self, s: f64) -> Self {
        ScalarField::Scaled(s, Box::new(self))
    }

    pub fn plus(self, other: ScalarField) -> Self {
        match self {
            ScalarField::Sum(mut v) => {
                v.push(other);
                ScalarField::Sum(v)
            }
            s => ScalarField::Sum(vec![s, other]),
        }
    }

    pub fn eval(&self, m: &Manifold, p: &Point) -> Result<f64> {
        match self {
            ScalarField::Constant(c) => Ok(*c),
            ScalarField::EmbeddingCoordinate(i) => {
                let y = m.embed(p).ok_or_else(|| GeoError::InvalidInput("manifold has no embedding".into()))?;
                y.get(*i).copied().ok_or(GeoError::DimensionMismatch { expected: *i + 1, got: y.len() })
            }
            ScalarField::ChartCoordinate { chart, index } => {
                let q = m.to_chart(p, *chart)?;
                Ok(q.coords[*index])
            }
            ScalarField::ChartQuadratic { chart, q, b, c } => {
                let x = m.to_chart(p, *chart)?.coords;
                Ok(0.5 * (x.transpose() * q * &x)[(0, 0)] + b.dot(&x) + c)
            }
            ScalarField::Distance(c) => m.distance(p, c),
            ScalarField::SquaredDistance(c) => m.distance(p, c).map(|d| d * d),
            ScalarField::DistanceToSet(s) => s.distance(m, p),
            ScalarField::SquaredDistanceToSet(s) => s.distance(m, p).map(|d| d * d),
            ScalarField::Scaled(s, g) => Ok(s * g.eval(m, p)?),
            ScalarField::Sum(v) => v.iter().try_fold(0.0, |acc, g| Ok(acc + g.eval(m, p)?)),
            ScalarField::Custom(f) => f(m, p),
        }
    }

    /// Coordinate differential `∂_i f` at `p` from closed forms, where one exists.
    ///
    /// Distance fields use `∇ d(·,c)² = −2 log_x c`; embedding coordinates use
    /// the embedding Jacobian.
    pub fn analytic_differential(&self, m: &Manifold, p: &Point) -> Option<Result<DVector<f64>>> {
        let n = m.dim();
        let covector_of = |v: DVector<f64>| m.metric(p) * v;
        match self {
            ScalarField::Constant(_) => Some(Ok(DVector::zeros(n))),
            ScalarField::EmbeddingCoordinate(i) => {
                let jac = m.embedding_jacobian(p)?;
                Some(Ok(jac.row(*i).transpose()))
            }
            ScalarField::ChartCoordinate { chart, index } if *chart == p.chart => {
                let mut d = DVector::zeros(n);
                d[*index] = 1.0;
                Some(Ok(d))
            }
            ScalarField::ChartQuadratic { chart, q, b, .. } if *chart == p.chart => {
                Some(Ok(q * &p.coords + b))
            }
            ScalarField::SquaredDistance(c) => {
                Some(m.log_map(p, c).map(|l| covector_of(l.components * -2.0)))
            }
            ScalarField::Distance(c) => Some(m.log_map(p, c).and_then(|l| {
                let nrm = m.norm(&l);
                if nrm == 0.0 {
                    Err(GeoError::ZeroGradient)
                } else {
                    Ok(covector_of(l.components * (-1.0 / nrm)))
                }
            })),
            ScalarField::Scaled(s, g) => g.analytic_differential(m, p).map(|r| r.map(|d| d * *s)),
            ScalarField::Sum(v) => {
                let mut acc = DVector::zeros(n);
                for g in v {
                    match g.analytic_differential(m, p)? {
                        Ok(d) => acc += d,
                        Err(e) => return Some(Err(e)),
                    }
                }
                Some(Ok(acc))
            }
            _ => None,
        }
    }
}
