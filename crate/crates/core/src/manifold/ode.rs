//! Dormand–Prince 5(4) integrator.
//!
//! The integrator advances a flat state vector and stops exactly at each
//! requested output time. A system may rewrite its state between steps
//! (chart changes); the first-same-as-last stage is recomputed when it does.

use crate::prelude::*;
use crate::{GeoError, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step-size policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMode {
    /// Error-controlled steps with mixed absolute/relative tolerance.
    Adaptive { tol: f64, max_steps: usize },
    /// Uniform steps, at least `per_unit` per unit of time between outputs.
    #[cfg_attr(not(test), allow(dead_code))]
    Fixed { per_unit: f64 },
}

pub trait OdeSystem {
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]);
    /// Called after every accepted step. Returns `true` if it changed `y`.
    fn after_step(&mut self, _t: f64, _y: &mut [f64]) -> Result<bool> {
        Ok(false)
    }
}

/// Integrates from `t0` through every time in `outputs` (monotone in the
/// direction of integration), calling `record` at each.
pub fn integrate<S: OdeSystem>(
    sys: &mut S,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    mode: StepMode,
    mut record: impl FnMut(f64, &[f64]),
) -> Result<()> {
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut ynew = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut k: [Vec<f64>; 7] = core::array::from_fn(|_| vec![0.0; n]);
    let mut t = t0;
    sys.rhs(t, &y, &mut k[0]);
    let mut fresh_k1 = true;

    let mut h_adapt = 0.0;
    let mut steps = 0usize;
    for &t_out in outputs {
        let span = t_out - t;
        if span == 0.0 {
            record(t, &y);
            continue;
        }
        let dir = span.signum();
        let mut fixed_h = 0.0;
        if let StepMode::Fixed { per_unit } = mode {
            let m = (span.abs() * per_unit).ceil().max(1.0);
            fixed_h = span / m;
        } else if h_adapt == 0.0 {
            h_adapt = dir * initial_step(&y, &k[0], span.abs());
        }
        loop {
            let remaining = t_out - t;
            if remaining * dir <= 1e-14 * t_out.abs().max(1.0) {
                t = t_out;
                break;
            }
            if !fresh_k1 {
                sys.rhs(t, &y, &mut k[0]);
                fresh_k1 = true;
            }
            let (h, adaptive) = match mode {
                StepMode::Fixed { .. } => {
                    let h = if (remaining - fixed_h) * dir < 0.5 * fixed_h.abs() { remaining } else { fixed_h };
                    (h, None)
                }
                StepMode::Adaptive { tol, max_steps } => {
                    let mut h = h_adapt;
                    if (h - remaining) * dir > 0.0 {
                        h = remaining;
                    }
                    (h, Some((tol, max_steps)))
                }
            };
            dp_stages(sys, t, h, &y, &mut k, &mut tmp, &mut ynew);
            match adaptive {
                None => {
                    t += h;
                    core::mem::swap(&mut y, &mut ynew);
                    k.swap(0, 6);
                }
                Some((tol, max_steps)) => {
                    steps += 1;
                    if steps > max_steps {
                        return Err(GeoError::NoConvergence("ode step budget"));
                    }
                    let mut err = 0.0f64;
                    for i in 0..n {
                        let e = h
                            * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i]
                                + E6 * k[5][i]
                                + E7 * k[6][i]);
                        let sc = tol * (1.0 + y[i].abs().max(ynew[i].abs()));
                        err = err.max((e / sc).abs());
                    }
                    if !err.is_finite() {
                        if h.abs() < 1e-12 {
                            return Err(GeoError::NonFiniteState);
                        }
                        h_adapt = 0.25 * h;
                        continue;
                    }
                    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    if err <= 1.0 {
                        t += h;
                        core::mem::swap(&mut y, &mut ynew);
                        k.swap(0, 6);
                        // A step clipped to hit an output should not shrink the next one.
                        if h.abs() >= h_adapt.abs() * 0.999 {
                            h_adapt = h * fac;
                        }
                    } else {
                        h_adapt = h * fac.min(1.0);
                        if h_adapt.abs() < 1e-14 {
                            return Err(GeoError::NonFiniteState);
                        }
                        continue;
                    }
                }
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(GeoError::NonFiniteState);
            }
            if sys.after_step(t, &mut y)? {
                fresh_k1 = false;
            }
        }
        record(t, &y);
    }
    Ok(())
}

fn initial_step(y: &[f64], f0: &[f64], span: f64) -> f64 {
    let d0 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d1 = f0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = if d1 < 1e-10 { span } else { 0.05 * (d0 + 1.0) / d1 };
    h.min(span).max(1e-6 * span)
}

fn dp_stages<S: OdeSystem>(
    sys: &mut S,
    t: f64,
    h: f64,
    y: &[f64],
    k: &mut [Vec<f64>; 7],
    tmp: &mut [f64],
    ynew: &mut [f64],
) {
    let n = y.len();
    for i in 0..n {
        tmp[i] = y[i] + h * A21 * k[0][i];
    }
    sys.rhs(t + C2 * h, tmp, &mut k[1]);
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
    }
    sys.rhs(t + C3 * h, tmp, &mut k[2]);
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
    }
    sys.rhs(t + C4 * h, tmp, &mut k[3]);
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
    }
    sys.rhs(t + C5 * h, tmp, &mut k[4]);
    for i in 0..n {
        tmp[i] = y[i]
            + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
    }
    sys.rhs(t + h, tmp, &mut k[5]);
    for i in 0..n {
        ynew[i] = y[i]
            + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
    }
    sys.rhs(t + h, ynew, &mut k[6]);
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn harmonic_oscillator_adaptive() {
        let outs = [1.0, 2.5, 10.0];
        let mut got = Vec::new();
        integrate(
            &mut Oscillator,
            0.0,
            &[0.0, 1.0],
            &outs,
            StepMode::Adaptive { tol: 1e-10, max_steps: 100_000 },
            |t, y| got.push((t, y[0])),
        )
        .unwrap();
        for (t, x) in got {
            assert!((x - t.sin()).abs() < 1e-8, "t={t} x={x}");
        }
    }

    #[test]
    fn harmonic_oscillator_fixed_and_backward() {
        let mut last = 0.0;
        integrate(
            &mut Oscillator,
            0.0,
            &[0.0, 1.0],
            &[-2.0],
            StepMode::Fixed { per_unit: 200.0 },
            |_, y| last = y[0],
        )
        .unwrap();
        assert!((last - (-2.0f64).sin()).abs() < 1e-12);
    }
}
