//! Support hypersurfaces `H = exp_{x*}(H₀ ∩ B̄(0, 2r))` and the separation
//! conditions `d_H(x) = d_S(x)`, `d_H(y) ≤ d_S(y)` on `U_x`.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::cone::{ConeMode, ConeOptions, ConeSamples};
use crate::manifold::{Manifold, Point, TangentVector};
use crate::optim::{multistart_1d, nelder_mead};
use crate::prelude::*;
use crate::{ConvexSet, GeoError, Result};

/// Image under `exp_{x*}` of the hyperplane orthogonal to `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSurface {
    pub base: Point,
    /// Unit normal at `x*`.
    pub normal: TangentVector,
    pub radius: f64,
    /// Orthonormal basis of `H₀ = v^⊥`.
    pub basis: Vec<DVector<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SupportOptions {
    /// `ε(x*)`; defaults to the convexity radius.
    pub epsilon: Option<f64>,
    /// Options for the normal-cone check on `v`.
    pub cone: ConeOptions,
}

/// Builds `H` at `x*` for a unit proximal normal `v` with
/// `r = min(ε(x*)/2, π/(2√δ))`.
pub fn support_hypersurface(
    m: &Manifold,
    set: &ConvexSet,
    base: &Point,
    v: &TangentVector,
    opts: &SupportOptions,
) -> Result<SupportSurface> {
    let normal = m.normalize(v).ok_or(GeoError::NotANormal)?;
    let report = ConeSamples::draw(m, set, base, &opts.cone)?.test(m, &normal, ConeMode::Convex);
    if !report.member {
        return Err(GeoError::NotANormal);
    }
    let epsilon = match opts.epsilon {
        Some(e) => e,
        None => m.convexity_radius(base)?,
    };
    let delta = m.local_curvature_bound(base, epsilon)?;
    let radius = (0.5 * epsilon).min(delta.half_conjugate_radius());
    let frame = m.orthonormal_frame(base, Some(&normal.components));
    let basis = (1..m.dim()).map(|i| frame.column(i).into_owned()).collect();
    Ok(SupportSurface { base: base.clone(), normal, radius, basis })
}

impl SupportSurface {
    /// `exp_{x*}(Σ a_i b_i)`.
    pub fn point(&self, m: &Manifold, a: &[f64]) -> Result<Point> {
        let mut w = DVector::zeros(m.dim());
        for (ai, b) in a.iter().zip(&self.basis) {
            w += b * *ai;
        }
        m.exp(&TangentVector::new(self.base.clone(), w))
    }

    /// `d_H(y)` by multi-start minimization over the parameter ball `‖a‖ ≤ 2r`.
    pub fn distance(&self, m: &Manifold, y: &Point) -> Result<f64> {
        let k = self.basis.len();
        let lim = 2.0 * self.radius;
        let eval = |a: &[f64]| -> f64 { self.point(m, a).and_then(|p| m.distance(y, &p)).unwrap_or(f64::INFINITY) };
        if k == 0 {
            return Ok(eval(&[]));
        }
        if k == 1 {
            let mins = multistart_1d(|s| eval(&[s]), -lim, lim, 11, 1e-11);
            return mins.first().map(|p| p.1).filter(|d| d.is_finite()).ok_or(GeoError::NoConvergence("d_H"));
        }
        // Clamp to the ball so the simplex never leaves the parameter domain.
        let clamped = |a: &[f64]| -> f64 {
            let r = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r <= lim {
                eval(a)
            } else {
                let b: Vec<f64> = a.iter().map(|x| x * lim / r).collect();
                eval(&b) + (r - lim)
            }
        };
        let mut best = f64::INFINITY;
        let l = m.log_map(&self.base, y).ok().map(|l| l.components);
        for s in 0..10 {
            let mut a0 = vec![0.0; k];
            match (&l, s) {
                (Some(l), 0) => {
                    for (i, b) in self.basis.iter().enumerate() {
                        a0[i] = m.inner(&self.base, l, b).clamp(-lim, lim);
                    }
                }
                (_, 0) => {}
                _ => {
                    let ang = s as f64;
                    for (i, ai) in a0.iter_mut().enumerate() {
                        *ai = 0.7 * lim * (ang * (i as f64 + 1.0) * 1.618).sin() / (k as f64).sqrt();
                    }
                }
            }
            let (_, fv) = nelder_mead(&clamped, &a0, 0.1 * lim, 1e-14, 2000);
            best = best.min(fv);
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(GeoError::NoConvergence("d_H"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RayCheck {
    pub t: f64,
    pub d_h: f64,
    pub d_s: f64,
    /// `proj_S exp_{x*}(t v) = x*` within `1e-4`.
    pub foot_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SupportReport {
    pub rays: Vec<RayCheck>,
    pub n_samples: usize,
    pub n_strict: usize,
    /// Largest `d_H(y) − d_S(y)` over the `U_x` samples.
    pub max_violation: f64,
    /// Equality on the ray and `d_H ≤ d_S + 1e-7` on every sample.
    pub pass: bool,
}

impl SupportReport {
    pub fn strict_fraction(&self) -> f64 {
        if self.n_samples == 0 {
            0.0
        } else {
            self.n_strict as f64 / self.n_samples as f64
        }
    }
}

/// Checks both support conditions.
///
/// The `U_x` samples are `y = exp_{x*}(w)` with `w` uniform in the tangent
/// half-ball `⟨w, v⟩ > 0`, `‖w‖ < radius`.
pub fn verify_support(
    m: &Manifold,
    set: &ConvexSet,
    h: &SupportSurface,
    t_schedule: &[f64],
    n_samples: usize,
    radius: f64,
    seed: u64,
) -> Result<SupportReport> {
    let x = &h.base;
    let v = &h.normal.components;
    let mut rays = Vec::new();
    let mut pass = true;
    for &t in t_schedule {
        let y = m.exp(&h.normal.scaled(t))?;
        let res = set.project(m, &y)?;
        let foot_ok = res.minimizers.iter().any(|z| m.distance(z, x).map(|d| d <= 1e-4).unwrap_or(false));
        let d_h = h.distance(m, &y)?;
        let ok = foot_ok && (d_h - res.value).abs() <= 1e-5;
        pass &= ok;
        rays.push(RayCheck { t, d_h, d_s: res.value, foot_ok, pass: ok });
    }
    let mut rng = crate::rng_from_seed(seed);
    let frame = m.orthonormal_frame(x, Some(v));
    let n = m.dim();
    let (mut n_strict, mut max_violation, mut count) = (0, f64::NEG_INFINITY, 0);
    while count < n_samples {
        let z: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
        let mut w = &frame * (&z * (r / z.norm().max(1e-300)));
        let vw = m.inner(x, &w, v);
        if vw == 0.0 {
            continue;
        }
        if vw < 0.0 {
            // Reflect across H₀.
            w -= v * (2.0 * vw);
        }
        let y = m.exp(&TangentVector::new(x.clone(), w))?;
        let d_s = set.distance(m, &y)?;
        let d_h = h.distance(m, &y)?;
        let diff = d_h - d_s;
        max_violation = max_violation.max(diff);
        if diff > 1e-7 {
            pass = false;
        }
        if diff < -1e-9 {
            n_strict += 1;
        }
        count += 1;
    }
    Ok(SupportReport {
        rays,
        n_samples: count,
        n_strict,
        max_violation: if count == 0 { 0.0 } else { max_violation },
        pass,
    })
}
