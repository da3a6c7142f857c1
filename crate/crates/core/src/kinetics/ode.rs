//! Dormand–Prince 5(4) embedded Runge–Kutta stepper with step-size control.
//!
//! The solver lands exactly on every requested sample time by shortening the
//! step that would overshoot it, so samples carry full fifth-order accuracy
//! without dense output.

/// Right-hand side of an autonomous or non-autonomous system `dy/dt = f(t, y)`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError<const N: usize> {
    StepUnderflow { t: f64, y: [f64; N] },
    NonFinite { t: f64, y: [f64; N] },
    /// The caller's guard rejected an accepted state.
    Guard { t: f64, y: [f64; N] },
}

// Butcher tableau.
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

// Fifth-order weights (FSAL: also row 7 of the tableau).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (a, k) in terms {
            acc += a * k[i];
        }
        *o += h * acc;
    }
    out
}

fn error_norm<const N: usize>(
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    ctl: &StepControl,
) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let scale = ctl.abs_tol + ctl.rel_tol * y0[i].abs().max(y1[i].abs());
            (err[i] / scale).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

fn initial_step<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    ctl: &StepControl,
) -> f64 {
    let scale = |i: usize| ctl.abs_tol + ctl.rel_tol * y0[i].abs();
    let d0 = (0..N).map(|i| (y0[i] / scale(i)).powi(2)).sum::<f64>().sqrt();
    let d1 = (0..N).map(|i| (f0[i] / scale(i)).powi(2)).sum::<f64>().sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(ctl.max_step);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = sys.rhs(t0 + h0, &y1);
    let d2 = (0..N)
        .map(|i| ((f1[i] - f0[i]) / scale(i)).powi(2))
        .sum::<f64>()
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(ctl.max_step)
}

/// Integrate from `t0` through the strictly increasing `sample_times`
/// (the first of which must equal `t0`), recording the state at each.
///
/// `guard` is checked after every accepted step; returning `false` aborts
/// with [`OdeError::Guard`].
pub fn integrate<const N: usize, S, G>(
    sys: &S,
    y0: [f64; N],
    sample_times: &[f64],
    ctl: &StepControl,
    guard: G,
) -> Result<OdeSolution<N>, OdeError<N>>
where
    S: OdeSystem<N>,
    G: Fn(&[f64; N]) -> bool,
{
    let mut sol = OdeSolution {
        times: Vec::with_capacity(sample_times.len()),
        states: Vec::with_capacity(sample_times.len()),
        accepted: 0,
        rejected: 0,
    };
    let Some(&t0) = sample_times.first() else {
        return Ok(sol);
    };
    let mut t = t0;
    let mut y = y0;
    sol.times.push(t);
    sol.states.push(y);

    let mut k1 = sys.rhs(t, &y);
    let mut h = initial_step(sys, t, &y, &k1, ctl);

    for &target in &sample_times[1..] {
        while t < target {
            let remaining = target - t;
            let landing = h >= remaining;
            let step = if landing { remaining } else { h };
            if step <= 16.0 * f64::EPSILON * t.abs().max(1.0) && !landing {
                return Err(OdeError::StepUnderflow { t, y });
            }

            let k2 = sys.rhs(t + C2 * step, &axpy(&y, step, &[(A21, &k1)]));
            let k3 = sys.rhs(t + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = sys.rhs(
                t + C4 * step,
                &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = sys.rhs(
                t + C5 * step,
                &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = sys.rhs(
                t + step,
                &axpy(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = sys.rhs(t + step, &y_new);

            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let norm = error_norm(&err, &y, &y_new, ctl);

            if !norm.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                sol.rejected += 1;
                h = step * MIN_FACTOR;
                if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                    return Err(OdeError::NonFinite { t, y });
                }
                continue;
            }

            let factor = if norm == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };

            if norm <= 1.0 {
                sol.accepted += 1;
                t = if landing { target } else { t + step };
                y = y_new;
                k1 = k7;
                if !guard(&y) {
                    return Err(OdeError::Guard { t, y });
                }
                // A landing step is usually truncated; keep the proposal that
                // was in force before it unless the error estimate allows more.
                let proposal = step * factor;
                h = if landing { h.max(proposal) } else { proposal };
                h = h.min(ctl.max_step);
            } else {
                sol.rejected += 1;
                h = step * factor.min(1.0);
                if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                    return Err(OdeError::StepUnderflow { t, y });
                }
            }
        }
        sol.times.push(t);
        sol.states.push(y);
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CTL: StepControl = StepControl {
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        max_step: 10.0,
    };

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| t_max * i as f64 / n as f64).collect()
    }

    #[test]
    fn exponential_decay() {
        let sys = |_t: f64, y: &[f64; 1]| [-2.0 * y[0]];
        let sol = integrate(&sys, [1.0], &grid(5.0, 50), &CTL, |_| true).unwrap();
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - (-2.0 * t).exp()).abs() < 1e-9);
        }
        assert_eq!(sol.times.len(), 51);
        assert_eq!(*sol.times.last().unwrap(), 5.0);
    }

    #[test]
    fn harmonic_oscillator_period() {
        let sys = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let tp = 2.0 * std::f64::consts::PI;
        let sol = integrate(&sys, [1.0, 0.0], &[0.0, tp], &CTL, |_| true).unwrap();
        let end = sol.states[1];
        assert!((end[0] - 1.0).abs() < 1e-8);
        assert!(end[1].abs() < 1e-8);
    }

    #[test]
    fn non_autonomous() {
        // y' = t, y(0) = 0 → y = t²/2; integrated exactly by a fifth-order scheme.
        let sys = |t: f64, _y: &[f64; 1]| [t];
        let sol = integrate(&sys, [0.0], &grid(3.0, 3), &CTL, |_| true).unwrap();
        assert!((sol.states[3][0] - 4.5).abs() < 1e-12);
    }

    #[test]
    fn guard_aborts() {
        let sys = |_t: f64, y: &[f64; 1]| [y[0]];
        let err = integrate(&sys, [1.0], &grid(10.0, 10), &CTL, |y| y[0] < 100.0).unwrap_err();
        match err {
            OdeError::Guard { y, t } => {
                assert!(y[0] >= 100.0);
                assert!(t > 4.0 && t < 5.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn finite_time_singularity_is_reported() {
        // y' = y², y(0) = 1 blows up at t = 1.
        let sys = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let err = integrate(&sys, [1.0], &[0.0, 2.0], &CTL, |_| true).unwrap_err();
        match err {
            OdeError::StepUnderflow { t, .. } | OdeError::NonFinite { t, .. } => {
                assert!(t < 1.0 && t > 0.99)
            }
            OdeError::Guard { .. } => panic!("no guard installed"),
        }
    }
}
