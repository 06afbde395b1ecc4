//! Closed sets: membership, boundary sampling, metric projection.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::manifold::{FermiChart, LogStrategy, Manifold, Point, TangentVector};
use crate::optim::{multistart_1d, nelder_mead};
use crate::prelude::*;
use crate::{GeoError, Result, Rng, ScalarField};

/// Geodesic ball used to look for the boundary of an implicit set.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub center: Point,
    pub radius: f64,
}

/// Description of a closed set.
#[derive(Debug, Clone)]
pub enum SetSpec {
    /// `B̄(center, radius)`.
    GeodesicBall { center: Point, radius: f64 },
    /// `{f ≤ level}`. Its boundary is found along geodesic rays from `region.center`.
    Sublevel { field: ScalarField, level: f64, region: Region },
    /// `{f = level}`.
    LevelSet { field: ScalarField, level: f64, region: Region },
    /// The geodesic segment from `p` to `q`.
    GeodesicSegment { p: Point, q: Point },
    /// `{Γ(t, x) : 0 ≤ t ≤ L, ‖x‖ ≤ h(t)}` in a Fermi chart, `h` a polynomial in `t`.
    FermiGraph { chart: FermiChart, height: Vec<f64> },
    Singleton(Point),
}

/// Output of [`ConvexSet::project`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    /// Minimizers, by value then coordinates.
    pub minimizers: Vec<Point>,
    pub value: f64,
    pub starts_tried: usize,
    pub starts_converged: usize,
    pub duplicate_flag: bool,
}

impl ProjectionResult {
    fn trivial(x: &Point) -> Self {
        Self { minimizers: vec![x.clone()], value: 0.0, starts_tried: 0, starts_converged: 1, duplicate_flag: false }
    }
}

/// Outcome of [`ConvexSet::local_convexity_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct LocalConvexityReport {
    pub pass: bool,
    pub pairs_tested: usize,
    pub max_violation: f64,
    /// `(y, z, offending point on the geodesic from y to z)`.
    pub witness: Option<(Point, Point, Point)>,
}

#[derive(Debug, Clone)]
struct SegmentData {
    velocity: DVector<f64>,
    length: f64,
}

/// A closed set with cached solver data.
#[derive(Debug, Clone)]
pub struct ConvexSet {
    pub spec: SetSpec,
    seeds: Vec<Point>,
    seed_proxy: Vec<DVector<f64>>,
    seed_spacing: f64,
    segment: Option<SegmentData>,
}

/// Cheap coordinates for screening: the embedding, else chart coordinates.
fn proxy(m: &Manifold, p: &Point) -> DVector<f64> {
    m.embed(p).unwrap_or_else(|| m.to_chart(p, 0).map(|q| q.coords).unwrap_or_else(|_| p.coords.clone()))
}

fn lex_key(m: &Manifold, p: &Point) -> Vec<f64> {
    proxy(m, p).iter().copied().collect()
}

fn height_at(h: &[f64], t: f64) -> f64 {
    h.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

impl ConvexSet {
    pub fn new(m: &Manifold, spec: SetSpec) -> Result<Self> {
        let mut set = Self { spec, seeds: Vec::new(), seed_proxy: Vec::new(), seed_spacing: 0.0, segment: None };
        match &set.spec {
            SetSpec::GeodesicBall { center, radius } => {
                m.check_point(center)?;
                if !(*radius > 0.0) {
                    return Err(GeoError::InvalidInput("ball radius must be positive".into()));
                }
            }
            SetSpec::Sublevel { region, .. } | SetSpec::LevelSet { region, .. } => {
                let region = region.clone();
                let count = m.tol.boundary_seeds;
                let dirs = deterministic_directions(m, &region.center, count);
                for d in dirs {
                    if let Some(p) = set.boundary_on_ray(m, &region, &d)? {
                        set.seed_proxy.push(proxy(m, &p));
                        set.seeds.push(p);
                    }
                }
                if set.seeds.is_empty() {
                    return Err(GeoError::EmptyCandidateSet);
                }
                let mut nn: Vec<f64> = set
                    .seed_proxy
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        set.seed_proxy
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, b)| (a - b).norm())
                            .fold(f64::INFINITY, f64::min)
                    })
                    .filter(|d| d.is_finite())
                    .collect();
                nn.sort_by(f64::total_cmp);
                set.seed_spacing = nn.get(nn.len() / 2).copied().unwrap_or(region.radius);
            }
            SetSpec::GeodesicSegment { p, q } => {
                let v = m.log_map(p, q)?;
                let length = m.norm(&v);
                set.segment = Some(SegmentData { velocity: v.components, length });
            }
            SetSpec::FermiGraph { chart, height } => {
                if height.is_empty() || chart.length <= 0.0 {
                    return Err(GeoError::InvalidInput("empty Fermi graph".into()));
                }
            }
            SetSpec::Singleton(p) => m.check_point(p)?,
        }
        Ok(set)
    }

    pub fn ball(m: &Manifold, center: Point, radius: f64) -> Result<Self> {
        Self::new(m, SetSpec::GeodesicBall { center, radius })
    }

    pub fn segment(m: &Manifold, p: Point, q: Point) -> Result<Self> {
        Self::new(m, SetSpec::GeodesicSegment { p, q })
    }

    pub fn sublevel(m: &Manifold, field: ScalarField, level: f64, region: Region) -> Result<Self> {
        Self::new(m, SetSpec::Sublevel { field, level, region })
    }

    pub fn level_set(m: &Manifold, field: ScalarField, level: f64, region: Region) -> Result<Self> {
        Self::new(m, SetSpec::LevelSet { field, level, region })
    }

    /// The defining field and level for implicit sets.
    pub fn implicit(&self) -> Option<(&ScalarField, f64)> {
        match &self.spec {
            SetSpec::Sublevel { field, level, .. } | SetSpec::LevelSet { field, level, .. } => Some((field, *level)),
            _ => None,
        }
    }

    pub fn is_segment(&self) -> bool {
        matches!(self.spec, SetSpec::GeodesicSegment { .. })
    }

    /// Segment endpoints, initial velocity and length.
    pub fn segment_data(&self) -> Option<(&Point, &Point, &DVector<f64>, f64)> {
        match (&self.spec, &self.segment) {
            (SetSpec::GeodesicSegment { p, q }, Some(s)) => Some((p, q, &s.velocity, s.length)),
            _ => None,
        }
    }

    /// `γ(σ)` on the segment, `σ ∈ [0, 1]`.
    pub fn segment_point(&self, m: &Manifold, sigma: f64) -> Result<Point> {
        let (p, _, v, _) = self.segment_data().ok_or(GeoError::NotAGeodesicBoundary)?;
        m.exp_map(p, &TangentVector::new(p.clone(), v.clone()), sigma)
    }

    /// Signed amount by which `y` violates membership (`≤ 0` inside).
    pub fn excess(&self, m: &Manifold, y: &Point) -> Result<f64> {
        match &self.spec {
            SetSpec::GeodesicBall { center, radius } => Ok(m.distance(center, y)? - radius),
            SetSpec::Sublevel { field, level, .. } => Ok(field.eval(m, y)? - level),
            SetSpec::LevelSet { field, level, .. } => Ok((field.eval(m, y)? - level).abs()),
            SetSpec::GeodesicSegment { .. } | SetSpec::Singleton(_) => Ok(self.project(m, y)?.value),
            SetSpec::FermiGraph { chart, height } => {
                let (t, x) = chart.inverse(m, y)?;
                let tc = t.clamp(0.0, chart.length);
                Ok((x.norm() - height_at(height, tc)).max(t - chart.length).max(-t))
            }
        }
    }

    pub fn contains(&self, m: &Manifold, y: &Point) -> Result<bool> {
        let tol = match self.spec {
            SetSpec::GeodesicSegment { .. } => m.tol.segment_membership,
            _ => m.tol.membership,
        };
        Ok(self.excess(m, y)? <= tol)
    }

    /// `d_S(x)`.
    pub fn distance(&self, m: &Manifold, x: &Point) -> Result<f64> {
        Ok(self.project(m, x)?.value)
    }

    /// Metric projection `proj_S x` with multi-start solvers.
    pub fn project(&self, m: &Manifold, x: &Point) -> Result<ProjectionResult> {
        m.check_point(x)?;
        match &self.spec {
            SetSpec::GeodesicBall { center, radius } => self.project_ball(m, center, *radius, x),
            SetSpec::Singleton(p) => {
                let d = m.distance(x, p)?;
                Ok(ProjectionResult {
                    minimizers: vec![p.clone()],
                    value: d,
                    starts_tried: 1,
                    starts_converged: 1,
                    duplicate_flag: false,
                })
            }
            SetSpec::GeodesicSegment { .. } => self.project_segment(m, x),
            SetSpec::Sublevel { field, level, .. } => {
                if field.eval(m, x)? <= *level + m.tol.membership {
                    return Ok(ProjectionResult::trivial(x));
                }
                self.project_level(m, field, *level, x, None)
            }
            SetSpec::LevelSet { field, level, .. } => {
                if (field.eval(m, x)? - level).abs() <= m.tol.membership {
                    return Ok(ProjectionResult::trivial(x));
                }
                self.project_level(m, field, *level, x, None)
            }
            SetSpec::FermiGraph { chart, height } => self.project_fermi(m, chart, height, x),
        }
    }

    /// Projection warm-started from a nearby foot. Implicit sets descend from
    /// `hint` only; other variants ignore it.
    pub fn project_with_hint(&self, m: &Manifold, x: &Point, hint: &Point) -> Result<ProjectionResult> {
        match &self.spec {
            SetSpec::Sublevel { field, level, .. } => {
                if field.eval(m, x)? <= *level + m.tol.membership {
                    return Ok(ProjectionResult::trivial(x));
                }
                self.project_level(m, field, *level, x, Some(hint))
            }
            SetSpec::LevelSet { field, level, .. } => self.project_level(m, field, *level, x, Some(hint)),
            _ => self.project(m, x),
        }
    }

    /// Projection onto `bd S = {f = c}` of an implicit set, from either side.
    pub fn project_boundary(&self, m: &Manifold, x: &Point, hint: Option<&Point>) -> Result<ProjectionResult> {
        let (field, level) = self.implicit().ok_or(GeoError::InvalidInput("set is not implicit".into()))?;
        if (field.eval(m, x)? - level).abs() <= m.tol.membership {
            return Ok(ProjectionResult::trivial(x));
        }
        self.project_level(m, field, level, x, hint)
    }

    fn project_ball(&self, m: &Manifold, center: &Point, radius: f64, x: &Point) -> Result<ProjectionResult> {
        let out = m.log_candidates(center, x, LogStrategy::Screened, None)?;
        let best = out.norms[0];
        if best <= radius + m.tol.membership {
            return Ok(ProjectionResult::trivial(x));
        }
        let mut minimizers = Vec::new();
        for (v, nrm) in out.candidates.iter().zip(&out.norms) {
            if *nrm - best > m.tol.duplicate_value.max(m.tol.log_ambiguity * (1.0 + best)) {
                continue;
            }
            let w = v * (radius / nrm);
            minimizers.push(m.exp(&TangentVector::new(center.clone(), w))?);
        }
        let n_conv = out.candidates.len();
        let mut res = ProjectionResult {
            minimizers,
            value: best - radius,
            starts_tried: out.starts_tried.max(1),
            starts_converged: n_conv,
            duplicate_flag: false,
        };
        self.finish_minimizers(m, &mut res);
        Ok(res)
    }

    fn project_segment(&self, m: &Manifold, x: &Point) -> Result<ProjectionResult> {
        let (p, _, v, _) = self.segment_data().ok_or(GeoError::NotAGeodesicBoundary)?;
        let tv = TangentVector::new(p.clone(), v.clone());
        let mut failures = 0usize;
        let mut phi = |s: f64| -> f64 {
            match m.exp_map(p, &tv, s).and_then(|y| m.distance(x, &y)) {
                Ok(d) => d,
                Err(_) => {
                    failures += 1;
                    f64::INFINITY
                }
            }
        };
        let mins = multistart_1d(&mut phi, 0.0, 1.0, 17, 1e-10);
        let tried = mins.len();
        let mins: Vec<(f64, f64)> = mins.into_iter().filter(|(_, d)| d.is_finite()).collect();
        if mins.is_empty() {
            return Err(GeoError::NoConvergence("segment projection"));
        }
        let best = mins[0].1;
        let mut minimizers = Vec::new();
        let mut sigmas: Vec<f64> = Vec::new();
        for (s, d) in &mins {
            if *d - best <= m.tol.duplicate_value && !sigmas.iter().any(|t| (t - s).abs() < 1e-7) {
                sigmas.push(*s);
                minimizers.push(m.exp_map(p, &tv, *s)?);
            }
        }
        let mut res = ProjectionResult {
            minimizers,
            value: if best <= m.tol.segment_membership { 0.0 } else { best },
            starts_tried: tried,
            starts_converged: mins.len(),
            duplicate_flag: false,
        };
        if res.value == 0.0 {
            res.minimizers.truncate(1);
        }
        self.finish_minimizers(m, &mut res);
        Ok(res)
    }

    /// Parameter of the closest segment point to `x` (which should lie on it).
    pub fn segment_parameter(&self, m: &Manifold, x: &Point) -> Result<f64> {
        let (p, _, v, _) = self.segment_data().ok_or(GeoError::NotAGeodesicBoundary)?;
        let tv = TangentVector::new(p.clone(), v.clone());
        let mins = multistart_1d(
            |s| m.exp_map(p, &tv, s).and_then(|y| m.distance(x, &y)).unwrap_or(f64::INFINITY),
            0.0,
            1.0,
            17,
            1e-12,
        );
        mins.first().map(|(s, _)| *s).ok_or(GeoError::NoConvergence("segment parameter"))
    }

    fn project_level(
        &self,
        m: &Manifold,
        field: &ScalarField,
        level: f64,
        x: &Point,
        hint: Option<&Point>,
    ) -> Result<ProjectionResult> {
        let starts: Vec<Point> = match hint {
            Some(h) => vec![h.clone()],
            None => self.basin_seeds(m, x)?,
        };
        let mut cands: Vec<(Point, f64)> = Vec::new();
        for s in &starts {
            if let Ok(c) = descend_level(m, field, level, x, s) {
                cands.push(c);
            }
        }
        if cands.is_empty() {
            return Err(GeoError::NoConvergence("level-set projection"));
        }
        cands.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = cands[0].1;
        let mut minimizers: Vec<Point> = Vec::new();
        for (p, d) in &cands {
            if *d - best > m.tol.duplicate_value {
                continue;
            }
            let pp = proxy(m, p);
            if !minimizers.iter().any(|q| (proxy(m, q) - &pp).norm() < 1e-6) {
                minimizers.push(p.clone());
            }
        }
        let mut res = ProjectionResult {
            minimizers,
            value: best,
            starts_tried: starts.len(),
            starts_converged: cands.len(),
            duplicate_flag: false,
        };
        self.finish_minimizers(m, &mut res);
        Ok(res)
    }

    /// Seeds screened by proxy distance, then reduced to one representative
    /// per basin of the exact distance.
    fn basin_seeds(&self, m: &Manifold, x: &Point) -> Result<Vec<Point>> {
        let px = proxy(m, x);
        let mut order: Vec<(f64, usize)> =
            self.seed_proxy.iter().enumerate().map(|(i, s)| ((s - &px).norm(), i)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        order.truncate(m.tol.sublevel_starts.max(1));
        let exact: Vec<(usize, f64)> = order
            .iter()
            .filter_map(|&(_, i)| m.distance(x, &self.seeds[i]).ok().map(|d| (i, d)))
            .collect();
        if exact.is_empty() {
            return Err(GeoError::EmptyCandidateSet);
        }
        let radius = 2.5 * self.seed_spacing;
        let mut reps: Vec<(usize, f64)> = exact
            .iter()
            .filter(|(i, d)| {
                exact.iter().all(|(j, e)| {
                    j == i || (self.seed_proxy[*i].clone() - &self.seed_proxy[*j]).norm() > radius || *d < *e || (*d == *e && i < j)
                })
            })
            .copied()
            .collect();
        reps.sort_by(|a, b| a.1.total_cmp(&b.1));
        reps.truncate(4);
        Ok(reps.into_iter().map(|(i, _)| self.seeds[i].clone()).collect())
    }

    fn project_fermi(&self, m: &Manifold, chart: &FermiChart, height: &[f64], x: &Point) -> Result<ProjectionResult> {
        if self.contains(m, x).unwrap_or(false) {
            return Ok(ProjectionResult::trivial(x));
        }
        let k = m.dim() - 1;
        let len = chart.length;
        // Parameters (t, z) are clamped into the region before evaluation.
        let clamp = |p: &[f64]| -> (f64, Vec<f64>) {
            let t = p[0].clamp(0.0, len);
            let h = height_at(height, t).max(0.0);
            let z = &p[1..];
            let nz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            let zc: Vec<f64> = if nz > h { z.iter().map(|v| v * h / nz).collect() } else { z.to_vec() };
            (t, zc)
        };
        let obj = |p: &[f64]| -> f64 {
            let (t, z) = clamp(p);
            chart.map(m, t, &z).and_then(|y| m.distance(x, &y)).unwrap_or(f64::INFINITY)
        };
        let mut starts: Vec<Vec<f64>> = Vec::new();
        for ti in 0..5 {
            let t = len * ti as f64 / 4.0;
            let h = height_at(height, t).max(0.0);
            for dir in 0..(2 * k) {
                let mut p = vec![t];
                let mut z = vec![0.0; k];
                z[dir / 2] = if dir % 2 == 0 { h } else { -h };
                p.extend(z);
                starts.push(p);
            }
        }
        let mut scored: Vec<(f64, Vec<f64>)> = starts.into_iter().map(|p| (obj(&p), p)).collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        scored.truncate(6);
        let mut cands: Vec<(Point, f64)> = Vec::new();
        for (_, p0) in &scored {
            let (p, v) = nelder_mead(obj, p0, 0.05 * len.max(1e-3), 1e-15, 400);
            if v.is_finite() {
                let (t, z) = clamp(&p);
                cands.push((chart.map(m, t, &z)?, v));
            }
        }
        if cands.is_empty() {
            return Err(GeoError::NoConvergence("fermi-graph projection"));
        }
        cands.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = cands[0].1;
        let mut minimizers: Vec<Point> = Vec::new();
        for (p, d) in &cands {
            let pp = proxy(m, p);
            if *d - best <= m.tol.duplicate_value && !minimizers.iter().any(|q| (proxy(m, q) - &pp).norm() < 1e-6) {
                minimizers.push(p.clone());
            }
        }
        let mut res = ProjectionResult {
            minimizers,
            value: best,
            starts_tried: scored.len(),
            starts_converged: cands.len(),
            duplicate_flag: false,
        };
        self.finish_minimizers(m, &mut res);
        Ok(res)
    }

    /// Deterministic ordering and the duplicate flag.
    fn finish_minimizers(&self, m: &Manifold, res: &mut ProjectionResult) {
        res.minimizers.sort_by(|a, b| {
            let (ka, kb) = (lex_key(m, a), lex_key(m, b));
            ka.partial_cmp(&kb).unwrap_or(core::cmp::Ordering::Equal)
        });
        let keys: Vec<DVector<f64>> = res.minimizers.iter().map(|p| proxy(m, p)).collect();
        res.duplicate_flag = keys
            .iter()
            .enumerate()
            .any(|(i, a)| keys.iter().skip(i + 1).any(|b| (a - b).norm() > m.tol.duplicate_distance));
    }

    /// Point where the ray `exp_c(t u)` first crosses the level, if it does
    /// within the region.
    fn boundary_on_ray(&self, m: &Manifold, region: &Region, dir: &DVector<f64>) -> Result<Option<Point>> {
        let (field, level) = self.implicit().ok_or(GeoError::InvalidInput("not an implicit set".into()))?;
        let tv = TangentVector::new(region.center.clone(), dir.clone());
        let g = |t: f64| -> Result<(Point, f64)> {
            let y = m.exp_map(&region.center, &tv, t)?;
            let v = field.eval(m, &y)? - level;
            Ok((y, v))
        };
        let steps = 48;
        let (_, g0) = g(0.0)?;
        let mut prev_t = 0.0;
        let mut prev_g = g0;
        for i in 1..=steps {
            let t = region.radius * i as f64 / steps as f64;
            let Ok((_, gt)) = g(t) else { break };
            if (gt > 0.0) != (prev_g > 0.0) {
                return refine_root(&g, prev_t, prev_g, t, gt).map(Some);
            }
            prev_t = t;
            prev_g = gt;
        }
        Ok(None)
    }

    /// `n` boundary points, deterministic in `seed`.
    pub fn boundary_sample(&self, m: &Manifold, n: usize, seed: u64) -> Result<Vec<Point>> {
        let mut rng = crate::rng_from_seed(seed);
        let mut out = Vec::with_capacity(n);
        match &self.spec {
            SetSpec::GeodesicBall { center, radius } => {
                for _ in 0..n {
                    let u = random_unit(m, center, &mut rng);
                    out.push(m.exp(&TangentVector::new(center.clone(), u * *radius))?);
                }
            }
            SetSpec::Sublevel { region, .. } | SetSpec::LevelSet { region, .. } => {
                let mut attempts = 0;
                while out.len() < n && attempts < 50 * n + 100 {
                    attempts += 1;
                    let u = random_unit(m, &region.center, &mut rng);
                    if let Some(p) = self.boundary_on_ray(m, region, &u)? {
                        out.push(p);
                    }
                }
                if out.len() < n {
                    return Err(GeoError::SamplingFailure { valid: out.len(), required: n });
                }
            }
            SetSpec::GeodesicSegment { .. } => {
                for i in 0..n {
                    let s = match i {
                        0 => 0.0,
                        1 => 1.0,
                        _ => rng.random::<f64>(),
                    };
                    out.push(self.segment_point(m, s)?);
                }
            }
            SetSpec::FermiGraph { chart, height } => {
                let k = m.dim() - 1;
                for _ in 0..n {
                    let t = rng.random::<f64>() * chart.length;
                    let h = height_at(height, t);
                    let mut z: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let nz = z.iter().map(|v: &f64| v * v).sum::<f64>().sqrt().max(1e-300);
                    z.iter_mut().for_each(|v| *v *= h / nz);
                    out.push(chart.map(m, t, &z)?);
                }
            }
            SetSpec::Singleton(p) => out.extend(core::iter::repeat_n(p.clone(), n)),
        }
        Ok(out)
    }

    /// Points of `S ∩ B(x, eps)` paired with `log_x y`.
    ///
    /// Full-dimensional sets are sampled in normal coordinates at `x` (so the
    /// logarithm is the sampled vector itself), half uniformly in the ball and
    /// half on dyadic shells `eps·2^-k`, `k ≤ 2·cone_sigma_max_log2`, so that
    /// the capped `σ` grid cannot absorb a first-order violation. Segments are sampled along their
    /// parameter, level sets along their tangent space followed by a retraction.
    pub fn local_samples(&self, m: &Manifold, x: &Point, eps: f64, n: usize, rng: &mut Rng) -> Result<Vec<(Point, DVector<f64>)>> {
        let mut out = Vec::with_capacity(n);
        let max_k = 2 * m.tol.cone_sigma_max_log2.max(1);
        let radius = |rng: &mut Rng, i: usize| -> f64 {
            if i % 2 == 0 {
                eps * rng.random::<f64>().powf(1.0 / m.dim() as f64)
            } else {
                let k = rng.random_range(1..=max_k as i32);
                eps * 2f64.powi(-k) * (0.5 + 0.5 * rng.random::<f64>())
            }
        };
        match &self.spec {
            SetSpec::GeodesicSegment { .. } => {
                let (p, _, v, len) = self.segment_data().ok_or(GeoError::NotAGeodesicBoundary)?;
                let sx = self.segment_parameter(m, x)?;
                let mut s = m.transport_along(p, v, &[], &[sx])?;
                let vel = s.pop().expect("one sample").0;
                let vel = m.express_at(&TangentVector::new(vel.point, vel.velocity), x)?.components;
                for i in 0..n {
                    let r = radius(rng, i) / len;
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    let mut s = sx + sign * r;
                    if !(0.0..=1.0).contains(&s) {
                        s = sx - sign * r;
                    }
                    if !(0.0..=1.0).contains(&s) {
                        continue;
                    }
                    out.push((self.segment_point(m, s)?, &vel * (s - sx)));
                }
            }
            SetSpec::LevelSet { field, level, .. } => {
                let grad = m.gradient(field, x)?;
                let frame = m.orthonormal_frame(x, Some(&grad.components));
                let k = m.dim() - 1;
                let mut attempts = 0;
                while out.len() < n && attempts < 4 * n {
                    attempts += 1;
                    let r = radius(rng, out.len());
                    let mut a: DVector<f64> = DVector::from_fn(k, |_, _| StandardNormal.sample(rng));
                    a /= a.norm().max(1e-300);
                    let mut w = DVector::zeros(m.dim());
                    for j in 0..k {
                        w += frame.column(j + 1) * (a[j] * r);
                    }
                    let Ok(y0) = m.exp(&TangentVector::new(x.clone(), w)) else { continue };
                    let Ok(y) = retract_level(m, field, *level, &y0) else { continue };
                    let Ok(l) = m.log_map(x, &y) else { continue };
                    if m.norm(&l) <= eps {
                        out.push((y, l.components));
                    }
                }
            }
            _ => {
                let frame = m.orthonormal_frame(x, None);
                let mut attempts = 0;
                while out.len() < n && attempts < 6 * n {
                    let r = radius(rng, attempts);
                    attempts += 1;
                    let z: DVector<f64> = DVector::from_fn(m.dim(), |_, _| StandardNormal.sample(rng));
                    let w = &frame * (&z * (r / z.norm().max(1e-300)));
                    let Ok(y) = m.exp(&TangentVector::new(x.clone(), w.clone())) else { continue };
                    // Strict membership: at dyadic radii near 1e-7 the membership slack
                    // would otherwise dominate ⟨v, log_x y⟩.
                    if self.excess(m, &y).is_ok_and(|e| e <= 0.0) {
                        out.push((y, w));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Samples pairs in `S ∩ B(x, eps)` and checks that the points at
    /// parameters `k/8` of the geodesic between them stay in `S`.
    pub fn local_convexity_check(&self, m: &Manifold, x: &Point, eps: f64, n: usize, seed: u64) -> Result<LocalConvexityReport> {
        let mut rng = crate::rng_from_seed(seed);
        let mut pts: Vec<Point> = self.local_samples(m, x, eps, 2 * n, &mut rng)?.into_iter().map(|(p, _)| p).collect();
        if let Ok(b) = self.boundary_sample(m, n, seed ^ 0x9e37) {
            for p in b {
                if m.distance(x, &p).map(|d| d <= eps).unwrap_or(false) {
                    pts.push(p);
                }
            }
        }
        let mut report = LocalConvexityReport { pass: true, pairs_tested: 0, max_violation: f64::NEG_INFINITY, witness: None };
        if pts.len() < 2 {
            report.max_violation = 0.0;
            return Ok(report);
        }
        let tol = 1e-7;
        for _ in 0..n {
            let i = rng.random_range(0..pts.len());
            let j = rng.random_range(0..pts.len());
            if i == j {
                continue;
            }
            let (y, z) = (&pts[i], &pts[j]);
            let Ok(v) = m.log_map(y, z) else { continue };
            report.pairs_tested += 1;
            for k in 1..8 {
                let mid = m.exp_map(y, &v, k as f64 / 8.0)?;
                let e = self.excess(m, &mid)?;
                if e > report.max_violation {
                    report.max_violation = e;
                }
                if e > tol && report.witness.is_none() {
                    report.pass = false;
                    report.witness = Some((y.clone(), z.clone(), mid));
                }
            }
        }
        if report.pairs_tested == 0 {
            report.max_violation = 0.0;
        }
        Ok(report)
    }
}

/// Secant/bisection refinement of a sign change of `g` on `[a, b]`.
fn refine_root(g: &dyn Fn(f64) -> Result<(Point, f64)>, mut a: f64, mut ga: f64, mut b: f64, mut gb: f64) -> Result<Point> {
    let mut best: Option<(Point, f64)> = None;
    for it in 0..100 {
        let mut t = if it % 3 == 2 { 0.5 * (a + b) } else { b - gb * (b - a) / (gb - ga) };
        if !(t > a.min(b) && t < a.max(b)) {
            t = 0.5 * (a + b);
        }
        let (y, gt) = g(t)?;
        let better = best.as_ref().map(|(_, v)| gt.abs() < v.abs()).unwrap_or(true);
        if better {
            best = Some((y, gt));
        }
        if gt.abs() <= 1e-14 || (b - a).abs() <= 1e-15 {
            break;
        }
        if (gt > 0.0) == (ga > 0.0) {
            a = t;
            ga = gt;
        } else {
            b = t;
            gb = gt;
        }
    }
    best.map(|(p, _)| p).ok_or(GeoError::NoConvergence("boundary root"))
}

/// Unit directions at `p` spread evenly (dimension 2) or drawn from a fixed seed.
fn deterministic_directions(m: &Manifold, p: &Point, count: usize) -> Vec<DVector<f64>> {
    let frame = m.orthonormal_frame(p, None);
    if m.dim() == 2 {
        return (0..count)
            .map(|k| {
                let a = core::f64::consts::TAU * k as f64 / count as f64;
                frame.column(0) * a.cos() + frame.column(1) * a.sin()
            })
            .collect();
    }
    let mut rng = crate::rng_from_seed(0xb0da);
    (0..count).map(|_| random_unit_in_frame(&frame, &mut rng)).collect()
}

fn random_unit_in_frame(frame: &DMatrix<f64>, rng: &mut Rng) -> DVector<f64> {
    let z: DVector<f64> = DVector::from_fn(frame.ncols(), |_, _| StandardNormal.sample(rng));
    frame * (&z / z.norm().max(1e-300))
}

pub(crate) fn random_unit(m: &Manifold, p: &Point, rng: &mut Rng) -> DVector<f64> {
    random_unit_in_frame(&m.orthonormal_frame(p, None), rng)
}

/// Newton steps along the gradient back onto `{f = level}`.
pub(crate) fn retract_level(m: &Manifold, field: &ScalarField, level: f64, y0: &Point) -> Result<Point> {
    let mut y = y0.clone();
    for _ in 0..20 {
        let g = field.eval(m, &y)? - level;
        if g.abs() <= 1e-14 * (1.0 + level.abs()) {
            return Ok(y);
        }
        let grad = field_gradient(m, field, &y)?;
        let gn2 = m.inner(&y, &grad, &grad);
        if gn2 <= 1e-16 {
            return Err(GeoError::ZeroGradient);
        }
        y = m.exp(&TangentVector::new(y.clone(), grad * (-g / gn2)))?;
    }
    let g = field.eval(m, &y)? - level;
    if g.abs() <= 1e-10 * (1.0 + level.abs()) {
        Ok(y)
    } else {
        Err(GeoError::NoConvergence("level-set retraction"))
    }
}

/// Riemannian gradient, from the closed form when the field has one.
pub(crate) fn field_gradient(m: &Manifold, field: &ScalarField, y: &Point) -> Result<DVector<f64>> {
    let d = match field.analytic_differential(m, y) {
        Some(r) => r?,
        None => m.differential(field, y)?,
    };
    Ok(m.raise(y, &d)?.components)
}

/// Riemannian gradient descent for `d(x, ·)` restricted to `{f = level}`.
///
/// Each step moves along the tangential part of `log_y x` (the negative
/// gradient of `½d²`), halving on increase, then retracts.
fn descend_level(m: &Manifold, field: &ScalarField, level: f64, x: &Point, start: &Point) -> Result<(Point, f64)> {
    let mut y = retract_level(m, field, level, start)?;
    let mut l = m.log_map(&y, x)?.components;
    let mut d = m.inner(&y, &l, &l).sqrt();
    for _ in 0..200 {
        let grad = field_gradient(m, field, &y)?;
        let gn2 = m.inner(&y, &grad, &grad);
        if gn2 <= 1e-16 {
            return Err(GeoError::ZeroGradient);
        }
        let step = &l - &grad * (m.inner(&y, &l, &grad) / gn2);
        let sn = m.inner(&y, &step, &step).sqrt();
        if sn <= 1e-10 * (1.0 + d) {
            break;
        }
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let trial = m
                .exp(&TangentVector::new(y.clone(), &step * alpha))
                .and_then(|p| retract_level(m, field, level, &p))
                .and_then(|p| m.log_map(&p, x).map(|lv| (p, lv.components)));
            if let Ok((p, lv)) = trial {
                let dt = m.inner(&p, &lv, &lv).sqrt();
                if dt <= d + 1e-15 {
                    moved = dt < d;
                    y = p;
                    l = lv;
                    d = dt;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok((y, d))
}
