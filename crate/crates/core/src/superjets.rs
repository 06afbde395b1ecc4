//! Second-order superjets `J^{2,+}f(x)`, the superjet positivity test and
//! the explicit touching function that certifies non-convexity.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::manifold::{BilinearForm, FermiChart, GeodesicPath, Manifold, Point, TangentVector};
use crate::optim::nelder_mead;
use crate::prelude::*;
use crate::{GeoError, Result, Rng, ScalarField};

/// Touching function that generated a jet.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum TouchingFamily {
    /// `f(x) + ⟨ξ, log_x y⟩ + ½ Q(log_x y, log_x y)`, `Q` diagonal in an
    /// orthonormal frame; `xi` and `q` are frame components.
    NormalQuadratic { xi: Vec<f64>, q: Vec<f64> },
    /// A caller-supplied field.
    Given,
    /// `−δ d²(·, γ(λ₀)) + C d_S² + k`.
    Certificate { delta: f64, c: f64, k: f64 },
}

/// `(dφ(x), d²φ(x))` with `f − φ` maximal at `x` on the sampled ball.
#[derive(Debug, Clone, PartialEq)]
pub struct JetElement {
    pub point: Point,
    /// Gradient of `φ` at `x` (a tangent vector).
    pub xi: DVector<f64>,
    pub hessian: BilinearForm,
    pub family: TouchingFamily,
    /// Smallest eigenvalue of the Hessian relative to the metric.
    pub min_eig: f64,
    /// `max (f − φ)(y) − (f − φ)(x)` over the small-radius samples.
    pub max_excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOptions {
    pub samples: usize,
    /// Sampling radii; acceptance uses the smallest.
    pub radii: Vec<f64>,
    pub seed: u64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { samples: 500, radii: vec![1e-1, 1e-2], seed: 0 }
    }
}

/// Outcome of a probe: the jet and whether `f − φ` peaks at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetProbe {
    pub accepted: bool,
    pub element: JetElement,
    /// Largest excess per radius, in the order of [`ProbeOptions::radii`].
    pub excess_by_radius: Vec<f64>,
}

/// Samples `w` in the tangent ball of radius `rho` (orthonormal frame
/// components): half uniform, half on dyadic shells down to `rho·2⁻¹⁰`.
fn ball_samples(dim: usize, rho: f64, n: usize, rng: &mut Rng) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| {
            let z: DVector<f64> = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut *rng));
            let r = if i % 2 == 0 {
                rho * rng.random::<f64>().powf(1.0 / dim as f64)
            } else {
                rho * 2f64.powi(-rng.random_range(0..=10)) * (0.5 + 0.5 * rng.random::<f64>())
            };
            let s = r / z.norm().max(1e-300);
            z * s
        })
        .collect()
}

fn frame_form(m: &Manifold, x: &Point, e: &DMatrix<f64>, q: &DMatrix<f64>) -> BilinearForm {
    let ge = m.metric(x) * e;
    BilinearForm { base: x.clone(), matrix: &ge * q * ge.transpose() }
}

/// Tests whether `f − φ` has a local maximum at `x` on sampled balls and
/// returns `(dφ(x), d²φ(x))` by finite differences.
pub fn superjet_probe(m: &Manifold, f: &ScalarField, x: &Point, phi: &ScalarField, opts: &ProbeOptions) -> Result<JetProbe> {
    let mut rng = crate::rng_from_seed(opts.seed);
    let e = m.orthonormal_frame(x, None);
    let base = f.eval(m, x)? - phi.eval(m, x)?;
    let mut excess_by_radius = Vec::new();
    for &rho in &opts.radii {
        let mut worst = f64::NEG_INFINITY;
        for a in ball_samples(m.dim(), rho, opts.samples, &mut rng) {
            let y = m.exp(&TangentVector::new(x.clone(), &e * a))?;
            worst = worst.max(f.eval(m, &y)? - phi.eval(m, &y)? - base);
        }
        excess_by_radius.push(worst);
    }
    let smallest = opts
        .radii
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| excess_by_radius[i])
        .unwrap_or(f64::INFINITY);
    let xi = m.gradient(phi, x)?.components;
    let hessian = m.hessian(phi, x)?;
    let min_eig = hessian.min_eigenvalue(m);
    Ok(JetProbe {
        accepted: smallest <= m.tol.jet_tol,
        element: JetElement { point: x.clone(), xi, hessian, family: TouchingFamily::Given, min_eig, max_excess: smallest },
        excess_by_radius,
    })
}

/// Probes the normal-coordinate quadratic family at `x`: `ξ = ∇f(x) + m·d`
/// over 5 directions and magnitudes `{0, 1e-2, 1e-1}`, and `Q` diagonal with
/// entries in `{−2, −1, 0, 1, 2}`. Returns every accepted jet.
pub fn probe_quadratic_family(m: &Manifold, f: &ScalarField, x: &Point, opts: &ProbeOptions) -> Result<Vec<JetElement>> {
    let n = m.dim();
    let mut rng = crate::rng_from_seed(opts.seed);
    let e = m.orthonormal_frame(x, None);
    let fx = f.eval(m, x)?;
    let grad = m.gradient(f, x)?.components;
    let g_frame = e.transpose() * (m.metric(x) * &grad);
    let rho = opts.radii.iter().copied().fold(f64::INFINITY, f64::min);
    let mut samples: Vec<(DVector<f64>, f64)> = Vec::with_capacity(opts.samples);
    for a in ball_samples(n, rho, opts.samples, &mut rng) {
        let y = m.exp(&TangentVector::new(x.clone(), &e * &a))?;
        samples.push((a, f.eval(m, &y)? - fx));
    }
    let dirs: Vec<DVector<f64>> = (0..5)
        .map(|k| {
            if n == 2 {
                let a = core::f64::consts::TAU * k as f64 / 5.0;
                DVector::from_column_slice(&[a.cos(), a.sin()])
            } else {
                let z: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
                z.normalize()
            }
        })
        .collect();
    let mut xis = vec![g_frame.clone()];
    for mag in [1e-2, 1e-1] {
        for d in &dirs {
            xis.push(&g_frame + d * mag);
        }
    }
    let levels = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut out = Vec::new();
    for xi in &xis {
        for idx in 0..levels.len().pow(n as u32) {
            let mut q = DVector::zeros(n);
            let mut r = idx;
            for i in 0..n {
                q[i] = levels[r % levels.len()];
                r /= levels.len();
            }
            let mut worst = f64::NEG_INFINITY;
            for (a, df) in &samples {
                let phi = xi.dot(a) + 0.5 * a.iter().zip(q.iter()).map(|(ai, qi)| qi * ai * ai).sum::<f64>();
                worst = worst.max(df - phi);
            }
            if worst <= m.tol.jet_tol {
                let qm = DMatrix::from_diagonal(&q);
                out.push(JetElement {
                    point: x.clone(),
                    xi: &e * xi,
                    hessian: frame_form(m, x, &e, &qm),
                    family: TouchingFamily::NormalQuadratic { xi: xi.iter().copied().collect(), q: q.iter().copied().collect() },
                    min_eig: q.iter().copied().fold(f64::INFINITY, f64::min),
                    max_excess: worst,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub pass: bool,
    pub points: usize,
    pub accepted: usize,
    /// Smallest eigenvalue over accepted jets (`+∞` if none).
    pub min_eig: f64,
    /// Accepted jet with the smallest eigenvalue, when it is negative.
    pub witness: Option<JetElement>,
}

/// Probes the quadratic family at `n` points of the geodesic ball
/// `B(center, radius)`; passes iff every accepted jet has `min eig ≥ −1e-6`.
pub fn superjet_positivity(m: &Manifold, f: &ScalarField, center: &Point, radius: f64, n: usize, seed: u64) -> Result<PositivityReport> {
    let mut rng = crate::rng_from_seed(seed);
    let mut report = PositivityReport { pass: true, points: 0, accepted: 0, min_eig: f64::INFINITY, witness: None };
    let mut best: Option<JetElement> = None;
    for i in 0..n {
        let u = crate::sets::random_unit(m, center, &mut rng);
        let r = radius * rng.random::<f64>().powf(1.0 / m.dim() as f64);
        let x = m.exp(&TangentVector::new(center.clone(), u * r))?;
        let jets = probe_quadratic_family(m, f, &x, &ProbeOptions { seed: seed.wrapping_add(i as u64), ..ProbeOptions::default() })?;
        report.points += 1;
        report.accepted += jets.len();
        for j in jets {
            if best.as_ref().is_none_or(|b| j.min_eig < b.min_eig) {
                best = Some(j);
            }
        }
    }
    if let Some(b) = best {
        report.min_eig = b.min_eig;
        report.pass = b.min_eig >= -1e-6;
        if !report.pass {
            report.witness = Some(b);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateOptions {
    /// Tube radius `μ`; defaults to half the validated Fermi radius.
    pub mu: Option<f64>,
    /// Number of grid points for the supremum and the maximizer search.
    pub grid: usize,
    pub headroom: f64,
    pub seed: u64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self { mu: None, grid: 10_000, headroom: 0.05, seed: 0 }
    }
}

/// The proof's touching function and the superjet it produces.
#[derive(Debug, Clone, PartialEq)]
pub struct NonconvexityCertificate {
    /// `λ₀` on the (possibly shrunk) geodesic.
    pub lambda0: f64,
    /// The geodesic was shortened around `λ₀` to make `f(γ(λ₀))` exceed both endpoints.
    pub shrunk: bool,
    pub length: f64,
    pub k: f64,
    pub k0: f64,
    pub delta: f64,
    pub c: f64,
    pub mu: f64,
    /// Radius `μ'` of the validated Fermi chart.
    pub mu_chart: f64,
    pub sup_f: f64,
    pub y0: Point,
    /// Fermi coordinates `(t, x)` of `y0`.
    pub t0: f64,
    pub x0: DVector<f64>,
    pub gradient: DVector<f64>,
    pub hessian: BilinearForm,
    pub min_eig: f64,
    /// `|⟨e_min, γ̇⟩|` for the unit eigenvector of the smallest eigenvalue.
    pub alignment: f64,
    /// `min (φ − f)` over the sampled boundary of the tube.
    pub boundary_margin: f64,
    /// Distance of the maximizer to the tube boundary.
    pub interior_distance: f64,
    pub valid: bool,
    /// Fermi chart of the tube and the point `γ(λ₀)`.
    pub chart: FermiChart,
    pub center: Point,
}

impl NonconvexityCertificate {
    /// The touching function `φ`, with `d_S` read off the Fermi chart.
    pub fn touching(&self) -> ScalarField {
        let chart = self.chart.clone();
        let center = self.center.clone();
        let (delta, c, k) = (self.delta, self.c, self.k);
        ScalarField::custom(move |m, y| {
            let (_, x) = chart.inverse(m, y)?;
            let d = m.distance(y, &center)?;
            Ok(-delta * d * d + c * x.norm_squared() + k)
        })
    }

    pub fn into_result(self) -> Result<Self> {
        if self.valid {
            Ok(self)
        } else {
            Err(GeoError::MaximizerOnBoundary)
        }
    }
}

struct Touching<'a> {
    m: &'a Manifold,
    center: Point,
    delta: f64,
    c: f64,
    k: f64,
}

impl Touching<'_> {
    /// `φ` at `Γ(t, x)` using `d_S = ‖x‖` inside the Fermi tube.
    fn at(&self, y: &Point, x: &[f64]) -> Result<f64> {
        let d = self.m.distance(y, &self.center)?;
        let ds2: f64 = x.iter().map(|v| v * v).sum();
        Ok(-self.delta * d * d + self.c * ds2 + self.k)
    }
}

/// Tube grid: `nt` values of `t ∈ [0, ℓ]` times normal offsets in `B̄(0, r)`.
fn tube_grid(dim: usize, length: f64, r: f64, total: usize) -> (Vec<f64>, Vec<DVector<f64>>) {
    let k = dim - 1;
    let nt = ((total as f64).powf(1.0 / dim as f64).round() as usize).max(3);
    let per = (total / nt).max(1);
    let side = ((per as f64).powf(1.0 / k.max(1) as f64).round() as usize).max(3);
    let ts: Vec<f64> = (0..nt).map(|i| length * i as f64 / (nt - 1) as f64).collect();
    let mut xs = Vec::new();
    let coord = |i: usize| -r + 2.0 * r * i as f64 / (side - 1) as f64;
    for idx in 0..side.pow(k as u32) {
        let mut v = DVector::zeros(k);
        let mut q = idx;
        for j in 0..k {
            v[j] = coord(q % side);
            q /= side;
        }
        if v.norm() <= r * (1.0 + 1e-12) {
            xs.push(v);
        }
    }
    (ts, xs)
}

/// Builds `φ = −δ d²(·, γ(λ₀)) + C d_S² + k` on a Fermi tube around `γ`,
/// locates the maximizer `y₀` of `f − φ` and returns `(dφ(y₀), d²φ(y₀))`.
///
/// `path` is parametrized on `[0, t_end]`; `lambda0` is a fraction of it.
pub fn nonconvexity_certificate(
    m: &Manifold,
    f: &ScalarField,
    path: &GeodesicPath,
    lambda0: f64,
    opts: &CertificateOptions,
) -> Result<NonconvexityCertificate> {
    if !(lambda0 > 0.0 && lambda0 < 1.0) {
        return Err(GeoError::InvalidInput("lambda0 must lie in (0, 1)".into()));
    }
    let at = |lam: f64| m.path_point(path, lam * path.t_end);
    let f_at = |lam: f64| -> Result<f64> { f.eval(m, &at(lam)?) };
    let (f0, f1, fl) = (f_at(0.0)?, f_at(1.0)?, f_at(lambda0)?);
    if fl <= (1.0 - lambda0) * f0 + lambda0 * f1 + 1e-6 {
        return Err(GeoError::NotAViolation);
    }
    // Shrink [a, b] around λ₀ until f(γ(λ₀)) exceeds both endpoint values.
    let (mut a, mut b) = (0.0, 1.0);
    let (mut fa, mut fb) = (f0, f1);
    let mut shrunk = false;
    for _ in 0..40 {
        if fl > fa.max(fb) + 1e-9 {
            break;
        }
        a = lambda0 - 0.5 * (lambda0 - a);
        b = lambda0 + 0.5 * (b - lambda0);
        fa = f_at(a)?;
        fb = f_at(b)?;
        shrunk = true;
    }
    if fl <= fa.max(fb) + 1e-9 {
        // A chord violation with f monotone near λ₀: the endpoint bracket cannot be built.
        return Err(GeoError::InvalidInput("f along the path has no interior maximum near lambda0".into()));
    }
    let sub = if shrunk {
        let mut s = m.transport_along(&path.start, &path.initial_velocity, &[], &[a * path.t_end])?;
        let sa = s.pop().expect("one sample").0;
        let v = TangentVector::new(sa.point, sa.velocity * ((b - a) * path.t_end));
        m.geodesic(&v, 1.0, 16)?
    } else {
        path.clone()
    };
    let lam = (lambda0 - a) / (b - a);

    let chart = FermiChart::new(m, &sub)?;
    let length = chart.length;
    let mu_chart = chart.mu;
    let mut mu = opts.mu.unwrap_or(0.5 * mu_chart).min(mu_chart);
    let gap = fl - fa.max(fb);
    let k = fl - gap / 3.0;
    let k0 = fa.max(fb) + gap / 3.0;

    // f < k₀ on the balls of radius μ around both endpoints.
    let mut rng = crate::rng_from_seed(opts.seed);
    let ends = [sub.start.clone(), sub.end().clone()];
    let mut ok = false;
    for _ in 0..30 {
        ok = true;
        'outer: for p in &ends {
            let e = m.orthonormal_frame(p, None);
            for w in ball_samples(m.dim(), mu, 64, &mut rng) {
                let y = m.exp(&TangentVector::new(p.clone(), &e * w))?;
                if f.eval(m, &y)? >= k0 {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            break;
        }
        mu *= 0.5;
    }
    if !ok || mu < 1e-4 {
        return Err(GeoError::NoConvergence("certificate tube radius"));
    }
    let delta = (k - k0) / (lam.max(1.0 - lam) * length + mu).powi(2);

    // Supremum of f over the closed tube of radius μ'.
    let (ts, xs) = tube_grid(m.dim(), length, mu_chart, opts.grid);
    let mut frames = Vec::with_capacity(ts.len());
    for &t in &ts {
        frames.push(chart.frame_at(m, t)?);
    }
    let (mut sup_f, mut inf_f) = (f64::NEG_INFINITY, f64::INFINITY);
    for fr in &frames {
        for x in &xs {
            let y = FermiChart::map_in_frame(m, fr, x.as_slice())?;
            let v = f.eval(m, &y)?;
            sup_f = sup_f.max(v);
            inf_f = inf_f.min(v);
        }
    }
    let sup_hat = sup_f + opts.headroom * (sup_f - inf_f).max(sup_f.abs()).max(1e-12);
    let c = ((sup_hat - k0) / (mu * mu)).max(0.0);

    let center = at(lambda0)?;
    let touching = Touching { m, center: center.clone(), delta, c, k };

    // Maximizer of f − φ over the closed tube of radius μ: grid, then ascent.
    let (ts, xs) = tube_grid(m.dim(), length, mu, opts.grid);
    let mut best = (f64::NEG_INFINITY, 0.0, DVector::zeros(m.dim() - 1));
    for &t in &ts {
        let fr = chart.frame_at(m, t)?;
        for x in &xs {
            let y = FermiChart::map_in_frame(m, &fr, x.as_slice())?;
            let g = f.eval(m, &y)? - touching.at(&y, x.as_slice())?;
            if g > best.0 {
                best = (g, t, x.clone());
            }
        }
    }
    let objective = |p: &[f64]| -> f64 {
        let t = p[0];
        let x = &p[1..];
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if t < 0.0 || t > length || r > mu {
            return f64::INFINITY;
        }
        let Ok(y) = chart.map(m, t, x) else { return f64::INFINITY };
        match (f.eval(m, &y), touching.at(&y, x)) {
            (Ok(fv), Ok(pv)) => -(fv - pv),
            _ => f64::INFINITY,
        }
    };
    let mut p0 = vec![best.1];
    p0.extend(best.2.iter().copied());
    let (p, _) = nelder_mead(objective, &p0, 0.02 * mu.min(length), 1e-15, 400);
    let (t0, x0) = (p[0], DVector::from_column_slice(&p[1..]));
    let y0 = chart.map(m, t0, x0.as_slice())?;
    let interior_distance = t0.min(length - t0).min(mu - x0.norm());

    // Boundary inequality φ ≥ f on ∂T_μ.
    let mut boundary_margin = f64::INFINITY;
    let sides: Vec<DVector<f64>> = if m.dim() == 2 {
        vec![DVector::from_element(1, mu), DVector::from_element(1, -mu)]
    } else {
        (0..16)
            .map(|_| {
                let z: DVector<f64> = DVector::from_fn(m.dim() - 1, |_, _| StandardNormal.sample(&mut rng));
                let s = mu / z.norm().max(1e-300);
                z * s
            })
            .collect()
    };
    for &t in ts.iter() {
        let fr = chart.frame_at(m, t)?;
        let caps = t == 0.0 || t == length;
        let offsets: Vec<&DVector<f64>> = if caps { xs.iter().collect() } else { sides.iter().collect() };
        for x in offsets {
            let y = FermiChart::map_in_frame(m, &fr, x.as_slice())?;
            boundary_margin = boundary_margin.min(touching.at(&y, x.as_slice())? - f.eval(m, &y)?);
        }
    }

    let mut cert = NonconvexityCertificate {
        lambda0: lam,
        shrunk,
        length,
        k,
        k0,
        delta,
        c,
        mu,
        mu_chart,
        sup_f,
        y0: y0.clone(),
        t0,
        x0: x0.clone(),
        gradient: DVector::zeros(0),
        hessian: BilinearForm { base: y0.clone(), matrix: DMatrix::zeros(0, 0) },
        min_eig: 0.0,
        alignment: 0.0,
        boundary_margin,
        interior_distance,
        valid: interior_distance > 1e-3,
        chart: chart.clone(),
        center,
    };
    // The two terms of φ live on different scales once C is large, so each
    // gets its own difference step.
    let dist2 = ScalarField::SquaredDistance(cert.center.clone());
    let normal2 = {
        let chart = chart.clone();
        ScalarField::custom(move |m, y| Ok(chart.inverse(m, y)?.1.norm_squared()))
    };
    let gradient = m.gradient(&dist2, &y0)?.components * -delta + m.gradient(&normal2, &y0)?.components * c;
    let h_dist = m.hessian_with_step(&dist2, &y0, 1e-3)?;
    let h_normal = m.hessian_with_step(&normal2, &y0, (1e-2 * mu).clamp(1e-5, 1e-3))?;
    let hessian = BilinearForm { base: y0.clone(), matrix: h_dist.matrix * -delta + h_normal.matrix * c };
    let e = m.orthonormal_frame(&y0, None);
    let hf = e.transpose() * &hessian.matrix * &e;
    let (min_eig, evec) = crate::manifold::min_eigenpair(&hf);
    let emin = &e * evec;
    let fr = chart.frame_at(m, t0)?;
    let axis = if x0.norm() > 0.0 {
        m.transport_between(&TangentVector::new(fr.point.clone(), fr.velocity.clone()), &y0)?.components
    } else {
        fr.velocity.clone()
    };
    let axis_norm = m.inner(&y0, &axis, &axis).sqrt();
    let alignment = (m.inner(&y0, &emin, &axis) / axis_norm.max(1e-300)).abs();

    cert.gradient = gradient;
    cert.hessian = hessian;
    cert.min_eig = min_eig;
    cert.alignment = alignment;
    Ok(cert)
}
