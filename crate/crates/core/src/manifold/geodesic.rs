//! Geodesics, exp/log, parallel transport.

use core::cell::Cell;

use super::ode::{integrate, OdeSystem, StepMode};
use super::{ChartId, Geometry, Manifold, Point, TangentVector};
use crate::prelude::*;
use crate::{GeoError, Result};

/// One sample along a geodesic.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSample {
    pub t: f64,
    pub point: Point,
    pub velocity: DVector<f64>,
}

/// A geodesic `t ↦ exp_p(t v)` on `[0, t_end]`, sampled uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub start: Point,
    pub initial_velocity: DVector<f64>,
    pub t_end: f64,
    pub samples: Vec<GeodesicSample>,
    pub length: f64,
    pub energy: f64,
}

impl GeodesicPath {
    pub fn span(&self) -> f64 {
        self.t_end.abs()
    }

    pub fn end(&self) -> &Point {
        &self.samples.last().expect("geodesic has samples").point
    }

    pub fn initial_tangent(&self) -> TangentVector {
        TangentVector::new(self.start.clone(), self.initial_velocity.clone())
    }

    /// Velocity at the end point, in the end point's chart.
    pub fn final_tangent(&self) -> TangentVector {
        let s = self.samples.last().expect("geodesic has samples");
        TangentVector::new(s.point.clone(), s.velocity.clone())
    }

    /// Largest deviation of the sampled speed from the initial speed.
    pub fn speed_defect(&self, m: &Manifold) -> f64 {
        let v0 = m.inner(&self.start, &self.initial_velocity, &self.initial_velocity).sqrt();
        self.samples
            .iter()
            .map(|s| (m.inner(&s.point, &s.velocity, &s.velocity).sqrt() - v0).abs())
            .fold(0.0, f64::max)
    }
}

/// Result of the multi-start logarithm.
#[derive(Debug, Clone, PartialEq)]
pub struct LogOutcome {
    /// Converged initial velocities, by increasing norm.
    pub candidates: Vec<DVector<f64>>,
    pub norms: Vec<f64>,
    /// Largest distance between near-minimal candidates.
    pub spread: f64,
    pub starts_tried: usize,
}

impl LogOutcome {
    pub fn is_ambiguous(&self, threshold: f64) -> bool {
        self.spread > threshold
    }
}

/// Which shooting starts the logarithm tries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogStrategy {
    /// Chord start first; extra starts only when the answer is not provably
    /// inside the injectivity radius.
    Screened,
    /// Always run every start.
    Exhaustive,
}

struct GeodesicSystem<'a> {
    geom: &'a dyn Geometry,
    chart: &'a Cell<ChartId>,
    n: usize,
    extra: usize,
    gamma: Vec<f64>,
}

impl<'a> GeodesicSystem<'a> {
    fn new(geom: &'a dyn Geometry, chart: &'a Cell<ChartId>, extra: usize) -> Self {
        let n = geom.dim();
        Self { geom, chart, n, extra, gamma: vec![0.0; n * n * n] }
    }
}

/// Rewrites a (position, vectors...) state from one chart into another.
fn rechart(geom: &dyn Geometry, from: ChartId, to: ChartId, n: usize, y: &mut [f64]) -> Result<()> {
    let jac = geom.transition_jacobian(from, to, &y[..n]).ok_or(GeoError::ChartExit)?;
    let x = geom.transition(from, to, &y[..n]).ok_or(GeoError::ChartExit)?;
    y[..n].copy_from_slice(x.as_slice());
    let mut buf = DVector::zeros(n);
    for block in y[n..].chunks_mut(n) {
        buf.copy_from_slice(block);
        let w = &jac * &buf;
        block.copy_from_slice(w.as_slice());
    }
    Ok(())
}

impl OdeSystem for GeodesicSystem<'_> {
    fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.n;
        self.geom.christoffel(self.chart.get(), &y[..n], &mut self.gamma);
        let v = &y[n..2 * n];
        dy[..n].copy_from_slice(v);
        for blk in 0..=self.extra {
            let w = &y[(1 + blk) * n..(2 + blk) * n];
            for k in 0..n {
                let g = &self.gamma[k * n * n..(k + 1) * n * n];
                let mut acc = 0.0;
                for i in 0..n {
                    let vi = v[i];
                    if vi == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        acc += g[i * n + j] * vi * w[j];
                    }
                }
                dy[(1 + blk) * n + k] = -acc;
            }
        }
    }

    fn after_step(&mut self, _t: f64, y: &mut [f64]) -> Result<bool> {
        let n = self.n;
        let chart = self.chart.get();
        let next = self.geom.preferred_chart(chart, &y[..n]);
        let changed = if next != chart {
            rechart(self.geom, chart, next, n, y)?;
            self.chart.set(next);
            true
        } else {
            false
        };
        if !self.geom.in_domain(self.chart.get(), &y[..n]) {
            return Err(GeoError::ChartExit);
        }
        Ok(changed)
    }
}

/// Composite Simpson rule on uniform samples (trapezoid fallback for odd counts).
pub(crate) fn simpson(values: &[f64], h: f64) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    if (m - 1) % 2 == 1 {
        return h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[m - 1]));
    }
    let mut acc = values[0] + values[m - 1];
    for (i, v) in values.iter().enumerate().take(m - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

impl Manifold {
    fn step_mode(&self) -> StepMode {
        StepMode::Adaptive { tol: self.tol.ode_tol, max_steps: self.tol.ode_max_steps }
    }

    /// Integrates the geodesic from `p` with velocity `v`, carrying the
    /// `vectors` by parallel transport, and samples it at `times`.
    ///
    /// Samples are expressed in `p`'s chart whenever they lie in its domain.
    pub fn transport_along(
        &self,
        p: &Point,
        v: &DVector<f64>,
        vectors: &[DVector<f64>],
        times: &[f64],
    ) -> Result<Vec<(GeodesicSample, Vec<DVector<f64>>)>> {
        self.check_point(p)?;
        let n = self.dim();
        if v.len() != n {
            return Err(GeoError::DimensionMismatch { expected: n, got: v.len() });
        }
        let geom = self.geometry();
        let mut y0 = Vec::with_capacity((2 + vectors.len()) * n);
        y0.extend_from_slice(p.coords.as_slice());
        y0.extend_from_slice(v.as_slice());
        for w in vectors {
            if w.len() != n {
                return Err(GeoError::DimensionMismatch { expected: n, got: w.len() });
            }
            y0.extend_from_slice(w.as_slice());
        }
        let chart = Cell::new(p.chart);
        let first = geom.preferred_chart(p.chart, p.coords.as_slice());
        if first != p.chart {
            rechart(geom, p.chart, first, n, &mut y0)?;
            chart.set(first);
        }
        let mut raw: Vec<(f64, ChartId, Vec<f64>)> = Vec::with_capacity(times.len());
        if v.iter().all(|c| *c == 0.0) {
            for &t in times {
                raw.push((t, chart.get(), y0.clone()));
            }
        } else {
            let mut sys = GeodesicSystem::new(geom, &chart, vectors.len());
            let chart_ref = &chart;
            integrate(&mut sys, 0.0, &y0, times, self.step_mode(), |t, y| {
                raw.push((t, chart_ref.get(), y.to_vec()))
            })?;
        }
        let mut out = Vec::with_capacity(raw.len());
        for (t, c, mut y) in raw {
            let mut c = c;
            if c != p.chart && geom.in_domain(p.chart, &y[..n]) {
                if let Some(x) = geom.transition(c, p.chart, &y[..n]) {
                    if geom.in_domain(p.chart, x.as_slice()) && rechart(geom, c, p.chart, n, &mut y).is_ok() {
                        c = p.chart;
                    }
                }
            }
            let point = Point::new(c, &y[..n]);
            let velocity = DVector::from_column_slice(&y[n..2 * n]);
            let ws = y[2 * n..].chunks(n).map(DVector::from_column_slice).collect();
            out.push((GeodesicSample { t, point, velocity }, ws));
        }
        Ok(out)
    }

    /// `exp_p(t v)`.
    pub fn exp_map(&self, p: &Point, v: &TangentVector, t: f64) -> Result<Point> {
        if v.base.chart != p.chart {
            return Err(GeoError::InvalidInput("tangent vector not based at p".into()));
        }
        let mut s = self.transport_along(p, &v.components, &[], &[t])?;
        Ok(s.pop().expect("one sample").0.point)
    }

    /// `exp_x(v)` for `v` based at `x`.
    pub fn exp(&self, v: &TangentVector) -> Result<Point> {
        self.exp_map(&v.base, v, 1.0)
    }

    /// Geodesic with initial velocity `v` on `[0, t_end]`, `intervals` uniform steps.
    pub fn geodesic(&self, v: &TangentVector, t_end: f64, intervals: usize) -> Result<GeodesicPath> {
        let m = intervals.max(2) + intervals.max(2) % 2;
        let times: Vec<f64> = (0..=m).map(|i| t_end * i as f64 / m as f64).collect();
        let raw = self.transport_along(&v.base, &v.components, &[], &times)?;
        let samples: Vec<GeodesicSample> = raw.into_iter().map(|(s, _)| s).collect();
        let speeds: Vec<f64> =
            samples.iter().map(|s| self.inner(&s.point, &s.velocity, &s.velocity).max(0.0)).collect();
        let h = t_end.abs() / m as f64;
        let length = simpson(&speeds.iter().map(|e| e.sqrt()).collect::<Vec<_>>(), h);
        let energy = simpson(&speeds, h);
        Ok(GeodesicPath {
            start: v.base.clone(),
            initial_velocity: v.components.clone(),
            t_end,
            samples,
            length,
            energy,
        })
    }

    /// The minimizing geodesic from `p` to `q` on `[0, 1]`.
    pub fn geodesic_between(&self, p: &Point, q: &Point, intervals: usize) -> Result<GeodesicPath> {
        let v = self.log_map(p, q)?;
        self.geodesic(&v, 1.0, intervals)
    }

    /// Point at parameter `t` of `path` (not restricted to the sampled grid).
    pub fn path_point(&self, path: &GeodesicPath, t: f64) -> Result<Point> {
        self.exp_map(&path.start, &path.initial_tangent(), t)
    }

    /// Parallel transport of `w` (based at the path start) to the path end.
    pub fn parallel_transport(&self, w: &TangentVector, path: &GeodesicPath) -> Result<TangentVector> {
        if w.base.chart != path.start.chart
            || (&w.base.coords - &path.start.coords).amax() > 1e-12 * (1.0 + path.start.coords.amax())
        {
            return Err(GeoError::InvalidInput("vector not based at path start".into()));
        }
        let mut s = self.transport_along(
            &path.start,
            &path.initial_velocity,
            core::slice::from_ref(&w.components),
            &[path.t_end],
        )?;
        let (sample, mut ws) = s.pop().expect("one sample");
        Ok(TangentVector::new(sample.point, ws.pop().expect("one vector")))
    }

    /// `l_{xy} w`: transport of `w ∈ T_x M` along the minimizing geodesic to `y`.
    pub fn transport_between(&self, w: &TangentVector, y: &Point) -> Result<TangentVector> {
        let x = &w.base;
        let v = self.log_map(x, y)?;
        let mut s = self.transport_along(x, &v.components, core::slice::from_ref(&w.components), &[1.0])?;
        let (sample, mut ws) = s.pop().expect("one sample");
        let out = TangentVector::new(sample.point, ws.pop().expect("one vector"));
        self.express_at(&out, y)
    }

    /// Re-expresses a tangent vector in the chart of `target` (same point).
    pub fn express_at(&self, v: &TangentVector, target: &Point) -> Result<TangentVector> {
        if v.base.chart == target.chart {
            return Ok(TangentVector::new(target.clone(), v.components.clone()));
        }
        let jac = self
            .geometry()
            .transition_jacobian(v.base.chart, target.chart, v.base.coords.as_slice())
            .ok_or(GeoError::ChartExit)?;
        Ok(TangentVector::new(target.clone(), jac * &v.components))
    }

    /// `d(p, q) = ‖log_p q‖`.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        let v = self.log_map(p, q)?;
        Ok(self.norm(&v))
    }

    /// Riemannian logarithm by shooting.
    pub fn log_map(&self, p: &Point, q: &Point) -> Result<TangentVector> {
        self.log_map_with_guess(p, q, None)
    }

    /// Logarithm with an optional warm start tried before the chord start.
    pub fn log_map_with_guess(&self, p: &Point, q: &Point, guess: Option<&DVector<f64>>) -> Result<TangentVector> {
        let out = self.log_candidates(p, q, LogStrategy::Screened, guess)?;
        if out.is_ambiguous(self.tol.log_ambiguity) {
            return Err(GeoError::AmbiguousSolution { spread: out.spread });
        }
        Ok(TangentVector::new(p.clone(), out.candidates[0].clone()))
    }

    /// All converged shooting solutions from the configured starts.
    pub fn log_candidates(
        &self,
        p: &Point,
        q: &Point,
        strategy: LogStrategy,
        guess: Option<&DVector<f64>>,
    ) -> Result<LogOutcome> {
        self.check_point(p)?;
        self.check_point(q)?;
        let n = self.dim();
        let target = self.shooting_target(q)?;
        if self.target_residual(p, &target).map(|r| r.norm() == 0.0).unwrap_or(false) {
            return Ok(LogOutcome {
                candidates: vec![DVector::zeros(n)],
                norms: vec![0.0],
                spread: 0.0,
                starts_tried: 0,
            });
        }
        let chord = self.chord_guess(p, q)?;
        let inj = self.injectivity_radius();
        let mut found: Vec<DVector<f64>> = Vec::new();
        let mut tried = 0;
        let mut first_starts: Vec<DVector<f64>> = Vec::new();
        if let Some(g) = guess {
            first_starts.push(g.clone());
        }
        first_starts.push(chord.clone());
        for s in &first_starts {
            tried += 1;
            if let Some(v) = self.shoot(p, &target, s.clone()) {
                let norm = self.inner(p, &v, &v).sqrt();
                let screened = strategy == LogStrategy::Screened && norm < self.tol.log_screen_fraction * inj;
                found.push(v);
                if screened {
                    return Ok(self.finish_log(p, found, tried));
                }
                break;
            }
        }
        // Chart chords can overshoot the cut locus; cap the start length.
        let chord_len = self.inner(p, &chord, &chord).sqrt().max(1e-6);
        let mut radii = vec![chord_len];
        if inj > 0.0 && inj.is_finite() && chord_len > 0.5 * inj {
            radii = vec![0.8 * inj, 0.4 * inj];
        }
        for d in self.start_directions(p) {
            for &rho in &radii {
                tried += 1;
                if let Some(v) = self.shoot(p, &target, &d * rho) {
                    found.push(v);
                }
            }
        }
        if found.is_empty() {
            return Err(GeoError::NoConvergence("log_map shooting"));
        }
        Ok(self.finish_log(p, found, tried))
    }

    fn finish_log(&self, p: &Point, mut found: Vec<DVector<f64>>, tried: usize) -> LogOutcome {
        let mut items: Vec<(f64, DVector<f64>)> =
            found.drain(..).map(|v| (self.inner(p, &v, &v).sqrt(), v)).collect();
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut uniq: Vec<(f64, DVector<f64>)> = Vec::new();
        for (nrm, v) in items {
            if !uniq.iter().any(|(_, u)| (u - &v).norm() <= 1e-7 * (1.0 + nrm)) {
                uniq.push((nrm, v));
            }
        }
        let best = uniq[0].0;
        let near: Vec<&DVector<f64>> = uniq
            .iter()
            .filter(|(nrm, _)| *nrm - best <= self.tol.log_ambiguity * (1.0 + best))
            .map(|(_, v)| v)
            .collect();
        let mut spread = 0.0f64;
        for a in &near {
            for b in &near {
                let d = *a - *b;
                spread = spread.max(self.inner(p, &d, &d).sqrt());
            }
        }
        LogOutcome {
            norms: uniq.iter().map(|(n, _)| *n).collect(),
            candidates: uniq.into_iter().map(|(_, v)| v).collect(),
            spread,
            starts_tried: tried,
        }
    }

    /// Deterministic unit directions (metric norm) at `p`.
    fn start_directions(&self, p: &Point) -> Vec<DVector<f64>> {
        let n = self.dim();
        let frame = self.orthonormal_frame(p, None);
        let count = self.tol.log_extra_starts;
        let mut dirs = Vec::with_capacity(count);
        if n == 1 {
            dirs.push(frame.column(0).into_owned());
            dirs.push(-frame.column(0).into_owned());
            return dirs;
        }
        if n == 2 {
            for k in 0..count {
                let a = core::f64::consts::TAU * (k as f64 + 0.5) / count as f64;
                dirs.push(frame.column(0) * a.cos() + frame.column(1) * a.sin());
            }
            return dirs;
        }
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = crate::rng_from_seed(0x5eed);
        for _ in 0..count {
            let z: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let z = &z / z.norm();
            dirs.push(&frame * z);
        }
        dirs
    }

    fn shooting_target(&self, q: &Point) -> Result<ShootTarget> {
        Ok(match self.embed(q) {
            Some(y) => ShootTarget::Embedded(y),
            None => ShootTarget::Chart(q.clone()),
        })
    }

    fn target_residual(&self, end: &Point, target: &ShootTarget) -> Result<DVector<f64>> {
        match target {
            ShootTarget::Embedded(y) => {
                let e = self.embed(end).ok_or(GeoError::ChartExit)?;
                Ok(e - y)
            }
            ShootTarget::Chart(q) => {
                let e = self.to_chart(end, q.chart)?;
                Ok(e.coords - &q.coords)
            }
        }
    }

    /// Initial guess for `log_p q`: the chart chord, or the embedded chord
    /// pulled back through the embedding Jacobian.
    fn chord_guess(&self, p: &Point, q: &Point) -> Result<DVector<f64>> {
        if let Ok(qc) = self.to_chart(q, p.chart) {
            return Ok(qc.coords - &p.coords);
        }
        let (ep, eq) = match (self.embed(p), self.embed(q)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(GeoError::ChartExit),
        };
        let jac = self.embedding_jacobian(p).ok_or(GeoError::ChartExit)?;
        let jtj = jac.transpose() * &jac;
        let rhs = jac.transpose() * (eq - ep);
        jtj.lu().solve(&rhs).ok_or(GeoError::DegeneratePlane)
    }

    /// Central-difference Jacobian of the embedding at `p`.
    pub fn embedding_jacobian(&self, p: &Point) -> Option<DMatrix<f64>> {
        let n = self.dim();
        let y0 = self.embed(p)?;
        let mut jac = DMatrix::zeros(y0.len(), n);
        let mut x = p.coords.clone();
        for j in 0..n {
            let h = 1e-6 * p.coords[j].abs().max(1.0);
            x[j] = p.coords[j] + h;
            let yp = self.geometry().embed(p.chart, x.as_slice())?;
            x[j] = p.coords[j] - h;
            let ym = self.geometry().embed(p.chart, x.as_slice())?;
            x[j] = p.coords[j];
            jac.set_column(j, &((yp - ym) / (2.0 * h)));
        }
        Some(jac)
    }

    /// Relative mismatch between the pulled-back embedding metric and `g`.
    pub fn embedding_metric_defect(&self, p: &Point) -> Option<f64> {
        let jac = self.embedding_jacobian(p)?;
        let g = self.metric(p);
        Some((jac.transpose() * jac - &g).amax() / g.amax())
    }

    fn shoot_residual(&self, p: &Point, target: &ShootTarget, v: &DVector<f64>) -> Result<DVector<f64>> {
        let mut s = self.transport_along(p, v, &[], &[1.0])?;
        let end = s.pop().expect("one sample").0.point;
        self.target_residual(&end, target)
    }

    /// Levenberg–Marquardt on the endpoint residual. `None` if it fails.
    fn shoot(&self, p: &Point, target: &ShootTarget, v0: DVector<f64>) -> Option<DVector<f64>> {
        let n = self.dim();
        let tol = self.tol.log_residual;
        let mut v = v0;
        let mut r = self.shoot_residual(p, target, &v).ok()?;
        let mut f = r.norm();
        let mut lambda = 1e-6;
        for _ in 0..self.tol.log_max_iter {
            if f <= tol {
                return Some(v);
            }
            let eta = 1e-7 * v.norm().max(1.0);
            let mut jac = DMatrix::zeros(r.len(), n);
            let mut ok = true;
            for j in 0..n {
                let mut vp = v.clone();
                vp[j] += eta;
                match self.shoot_residual(p, target, &vp) {
                    Ok(rp) => jac.set_column(j, &((rp - &r) / eta)),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                // Step back toward the base point and retry.
                v *= 0.5;
                r = self.shoot_residual(p, target, &v).ok()?;
                f = r.norm();
                continue;
            }
            let a = jac.transpose() * &jac;
            let g = jac.transpose() * &r;
            let mut accepted = false;
            let mut small_step = false;
            for _ in 0..12 {
                let mut damped = a.clone();
                for i in 0..n {
                    damped[(i, i)] += lambda * a[(i, i)].max(1e-12);
                }
                let Some(delta) = damped.lu().solve(&(-&g)) else {
                    lambda *= 10.0;
                    continue;
                };
                let vt = &v + &delta;
                if let Ok(rt) = self.shoot_residual(p, target, &vt) {
                    let ft = rt.norm();
                    if ft < f {
                        small_step = delta.norm() <= 1e-13 * (1.0 + v.norm());
                        v = vt;
                        r = rt;
                        f = ft;
                        lambda = (lambda * 0.2).max(1e-12);
                        accepted = true;
                        break;
                    }
                }
                lambda *= 8.0;
            }
            if !accepted || small_step {
                break;
            }
        }
        (f <= tol * 100.0).then_some(v)
    }
}

enum ShootTarget {
    Embedded(DVector<f64>),
    Chart(Point),
}
