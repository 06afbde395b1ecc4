//! Proximal normal cones: the defining inequality, the projection
//! characterization, level-set cones and construction of a nonzero normal.

use rand::Rng as _;

use crate::manifold::{Manifold, Point, TangentVector};
use crate::prelude::*;
use crate::sets::field_gradient;
use crate::{ConvexSet, GeoError, Result, ScalarField};

/// How [`is_normal_definition`] treats `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ConeMode {
    /// Search `σ ∈ {0, 1, 2, 4, …, 2^k}`.
    General,
    /// `σ = 0`, valid for locally convex sets.
    Convex,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConeOptions {
    /// Sampling radius; defaults to half the convexity radius at `x`.
    pub epsilon: Option<f64>,
    /// Number of samples; defaults to the tolerance profile.
    pub samples: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeMembershipReport {
    pub member: bool,
    /// Smallest grid value of `σ` that works, if any.
    pub sigma: Option<f64>,
    /// Sample with the largest violation at the largest `σ` tried.
    pub witness_y: Option<Point>,
    /// `⟨v, log_x y⟩ − σ‖log_x y‖²` at the witness.
    pub violation: f64,
    pub epsilon_used: f64,
    pub samples_used: usize,
}

fn default_epsilon(m: &Manifold, x: &Point) -> Result<f64> {
    Ok(0.5 * m.convexity_radius(x)?)
}

/// Samples `y ∈ S ∩ B(x, ε)` with `log_x y`, reusable across vectors at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSamples {
    pub base: Point,
    pub epsilon: f64,
    pub samples: Vec<(Point, DVector<f64>)>,
}

impl ConeSamples {
    pub fn draw(m: &Manifold, set: &ConvexSet, x: &Point, opts: &ConeOptions) -> Result<Self> {
        let eps = match opts.epsilon {
            Some(e) => e,
            None => default_epsilon(m, x)?,
        };
        let n = opts.samples.unwrap_or(m.tol.cone_samples);
        let mut rng = crate::rng_from_seed(opts.seed);
        let samples: Vec<_> = set
            .local_samples(m, x, eps, n, &mut rng)?
            .into_iter()
            .filter(|(_, w)| m.inner(x, w, w) > 0.0)
            .collect();
        if samples.len() < m.tol.cone_min_samples {
            return Err(GeoError::SamplingFailure { valid: samples.len(), required: m.tol.cone_min_samples });
        }
        Ok(Self { base: x.clone(), epsilon: eps, samples })
    }

    /// Tests `⟨v, log_x y⟩ ≤ σ‖log_x y‖²` on the stored samples.
    pub fn test(&self, m: &Manifold, v: &TangentVector, mode: ConeMode) -> ConeMembershipReport {
        let x = &self.base;
        let Some(u) = m.normalize(v) else {
            return ConeMembershipReport {
                member: true,
                sigma: Some(0.0),
                witness_y: None,
                violation: 0.0,
                epsilon_used: self.epsilon,
                samples_used: 0,
            };
        };
        let terms: Vec<(f64, f64)> =
            self.samples.iter().map(|(_, w)| (m.inner(x, &u.components, w), m.inner(x, w, w))).collect();
        let sigmas: Vec<f64> = match mode {
            ConeMode::Convex => vec![0.0],
            ConeMode::General => core::iter::once(0.0)
                .chain((0..=m.tol.cone_sigma_max_log2).map(|k| 2f64.powi(k as i32)))
                .collect(),
        };
        let worst = |sigma: f64| -> (usize, f64) {
            let mut best = (0usize, f64::NEG_INFINITY);
            for (i, (vw, ww)) in terms.iter().enumerate() {
                let viol = vw - sigma * ww;
                if viol > best.1
                    || (viol == best.1 && lex_less(&self.samples[i].0.coords, &self.samples[best.0].0.coords))
                {
                    best = (i, viol);
                }
            }
            best
        };
        let mut report = ConeMembershipReport {
            member: false,
            sigma: None,
            witness_y: None,
            violation: 0.0,
            epsilon_used: self.epsilon,
            samples_used: self.samples.len(),
        };
        for &sigma in &sigmas {
            let (i, viol) = worst(sigma);
            report.violation = viol;
            if viol <= m.tol.cone_convex {
                report.member = true;
                report.sigma = Some(sigma);
                return report;
            }
            report.witness_y = Some(self.samples[i].0.clone());
        }
        report
    }
}

/// Tests `⟨v, log_x y⟩ ≤ σ‖log_x y‖²` on samples `y ∈ S ∩ B(x, ε)`.
///
/// `v` is normalized first; the zero vector is a member with `σ = 0`.
pub fn is_normal_definition(
    m: &Manifold,
    set: &ConvexSet,
    x: &Point,
    v: &TangentVector,
    mode: ConeMode,
    opts: &ConeOptions,
) -> Result<ConeMembershipReport> {
    if m.norm(v) == 0.0 {
        let eps = match opts.epsilon {
            Some(e) => e,
            None => default_epsilon(m, x)?,
        };
        return Ok(ConeMembershipReport {
            member: true,
            sigma: Some(0.0),
            witness_y: None,
            violation: 0.0,
            epsilon_used: eps,
            samples_used: 0,
        });
    }
    Ok(ConeSamples::draw(m, set, x, opts)?.test(m, v, mode))
}

fn lex_less(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x != y {
            return x < y;
        }
    }
    false
}

/// One step of the projection schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionProbe {
    pub epsilon: f64,
    pub value: f64,
    /// Distance from `x` to the nearest minimizer.
    pub foot_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionConeReport {
    pub member: bool,
    /// A projection or logarithm hit a cut-locus ambiguity.
    pub ambiguous: bool,
    pub probes: Vec<ProjectionProbe>,
}

/// `v ∈ N^P_S(x)` iff `x ∈ proj_S exp_x(εv)` for some small `ε`, tested on
/// `ε ∈ {0.2, 0.1, 0.05, 0.025}·scale`.
pub fn is_normal_projection(
    m: &Manifold,
    set: &ConvexSet,
    x: &Point,
    v: &TangentVector,
    scale: f64,
) -> Result<ProjectionConeReport> {
    let Some(u) = m.normalize(v) else {
        return Ok(ProjectionConeReport { member: true, ambiguous: false, probes: Vec::new() });
    };
    let mut report = ProjectionConeReport { member: false, ambiguous: false, probes: Vec::new() };
    for frac in [0.2, 0.1, 0.05, 0.025] {
        let eps = frac * scale;
        let y = m.exp(&u.scaled(eps))?;
        let res = match set.project(m, &y) {
            Ok(r) => r,
            Err(GeoError::AmbiguousSolution { .. }) => {
                report.ambiguous = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut foot_error = f64::INFINITY;
        for z in &res.minimizers {
            match m.distance(x, z) {
                Ok(d) => foot_error = foot_error.min(d),
                Err(GeoError::AmbiguousSolution { .. }) => report.ambiguous = true,
                Err(e) => return Err(e),
            }
        }
        let pass = (res.value - eps).abs() <= 1e-6 && foot_error <= 1e-4;
        report.member |= pass;
        report.probes.push(ProjectionProbe { epsilon: eps, value: res.value, foot_error, pass });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalOptions {
    /// Distance of the external points from `x`.
    pub offset: f64,
    pub samples: usize,
    /// Size of the cluster averaged (nearest feet).
    pub cluster: usize,
    pub max_spread: f64,
    /// Re-projection passes along the current estimate.
    pub refinements: usize,
    pub seed: u64,
}

impl Default for NormalOptions {
    fn default() -> Self {
        Self { offset: 1e-2, samples: 16, cluster: 5, max_spread: 0.2, refinements: 3, seed: 0 }
    }
}

/// A unit proximal normal at `x ∈ bd S`.
///
/// External points `z_i` near `x` are projected to `x_i`; the unit vectors
/// `log_{x_i} z_i` are transported back to `x` and the cluster with feet
/// nearest to `x` is averaged. The average is then refined by re-projecting
/// `exp_x(offset·v)`.
pub fn nonzero_normal(m: &Manifold, set: &ConvexSet, x: &Point, opts: &NormalOptions) -> Result<TangentVector> {
    let mut rng = crate::rng_from_seed(opts.seed);
    let mut found: Vec<(f64, DVector<f64>)> = Vec::new();
    let mut attempts = 0;
    while found.len() < opts.samples && attempts < 8 * opts.samples {
        attempts += 1;
        let dir = crate::sets::random_unit(m, x, &mut rng);
        let r = opts.offset * (0.5 + 0.5 * rng.random::<f64>());
        let Ok(z) = m.exp(&TangentVector::new(x.clone(), dir * r)) else { continue };
        let Some(n) = normal_from_external(m, set, x, &z)? else { continue };
        found.push(n);
    }
    if found.len() < opts.cluster.max(1) {
        return Err(GeoError::NoConvergence("nonzero normal: too few external points"));
    }
    // Lower-dimensional sets have opposite normals; keep the half-cone of
    // the normal whose foot is nearest to `x`.
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let reference = found[0].1.clone();
    found.retain(|(_, n)| m.inner(x, n, &reference) > 0.0);
    found.truncate(opts.cluster.max(1));
    let mut mean = DVector::zeros(m.dim());
    for (_, n) in &found {
        mean += n;
    }
    let nm = m.inner(x, &mean, &mean).sqrt();
    if nm < 1e-12 {
        return Err(GeoError::NoConvergence("nonzero normal: cancelling directions"));
    }
    mean /= nm;
    let spread = found.iter().map(|(_, n)| m.angle(x, n, &mean)).fold(0.0, f64::max);
    if spread > opts.max_spread {
        return Err(GeoError::NoConvergence("nonzero normal: directions do not cluster"));
    }
    for _ in 0..opts.refinements {
        let z = m.exp(&TangentVector::new(x.clone(), &mean * opts.offset))?;
        let Some((_, n)) = normal_from_external(m, set, x, &z)? else { break };
        mean = n;
    }
    Ok(TangentVector::new(x.clone(), mean))
}

/// Unit normal at `proj_S z` transported to `x`, with the foot's distance to `x`.
fn normal_from_external(m: &Manifold, set: &ConvexSet, x: &Point, z: &Point) -> Result<Option<(f64, DVector<f64>)>> {
    let res = match set.project(m, z) {
        Ok(r) => r,
        Err(GeoError::AmbiguousSolution { .. }) | Err(GeoError::NoConvergence(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if res.value <= 1e-12 || res.minimizers.is_empty() {
        return Ok(None);
    }
    let foot = &res.minimizers[0];
    let l = m.log_map(foot, z)?;
    let Some(u) = m.normalize(&l) else { return Ok(None) };
    let at_x = m.transport_between(&u, x)?;
    let d = m.distance(foot, x)?;
    Ok(Some((d, at_x.components)))
}

/// Whether `v` is parallel (either sign) to `∇f(x)` within `1e-4` rad.
pub fn level_set_cone_check(m: &Manifold, f: &ScalarField, level: f64, x: &Point, v: &TangentVector) -> Result<bool> {
    let fx = f.eval(m, x)?;
    if (fx - level).abs() > 1e-8 {
        return Err(GeoError::InvalidInput("point is not on the level set".into()));
    }
    let g = field_gradient(m, f, x)?;
    if m.inner(x, &g, &g).sqrt() <= 1e-6 {
        return Err(GeoError::ZeroGradient);
    }
    if m.norm(v) == 0.0 {
        return Ok(true);
    }
    let a = m.angle(x, &v.components, &g);
    Ok(a.min(core::f64::consts::PI - a) <= 1e-4)
}
