//! Time evolution of the distribution functions.
//!
//! The shipped model is the slaved reduction: `f0`, `f1`, `f2` stay at their
//! thermal values, `f4` and `f5` follow `f3`, and `f3` obeys the cubic flow
//!
//! ```text
//! df3/ds = w³·Ṽ − w²·(Ṽ + J̃)·f3 + J̃·f3³ − κ̃·w²·f3
//! ```
//!
//! with `w = w2b`. The last term is the probe drive. It vanishes as κ̃ → 0,
//! where the flow reduces to the pure cubic, and at finite κ̃ it kicks `f3`
//! off the unstable point `f3 = w` (scrambling phase) or displaces the stable
//! point by O(κ̃) (dissipative phase). The drive is a model choice: the
//! finite-κ̃ probe collision integral is not available in closed form.
//!
//! The simulation variable `s` runs forward from the impulse and the entropy
//! at time `t` is read off the state at `s = t`.

pub mod ode;

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fmt_f64;
use crate::state::{renyi_delta, DistributionState, SlavedState};
use crate::thermo::ThermalPoint;

use self::ode::{OdeError, OdeSystem, StepControl};

/// `|f3|` beyond which the trajectory is declared to have blown up.
pub const BLOW_UP_BOUND: f64 = 1.5;

/// Effective golden-rule rates of the flat-band model (units of inverse time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCouplings {
    jt: f64,
    vt: f64,
    kt: f64,
}

impl EffectiveCouplings {
    /// System scrambling rate `jt`, bath rate `vt`, probe rate `kt`.
    pub fn new(jt: f64, vt: f64, kt: f64) -> Result<Self> {
        for (name, v) in [("Jt", jt), ("Vt", vt), ("Kt", kt)] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self { jt, vt, kt })
    }

    /// Build from the dimensionless ratios `r = Vt/Jt`, `k = Kt/Jt`.
    pub fn from_ratios(jt: f64, r: f64, k: f64) -> Result<Self> {
        Self::new(jt, r * jt, k * jt)
    }

    pub fn jt(&self) -> f64 {
        self.jt
    }
    pub fn vt(&self) -> f64 {
        self.vt
    }
    pub fn kt(&self) -> f64 {
        self.kt
    }

    /// `Vt / Jt`.
    pub fn bath_ratio(&self) -> f64 {
        self.vt / self.jt
    }

    /// `Kt / Jt`.
    pub fn probe_ratio(&self) -> f64 {
        self.kt / self.jt
    }

    /// True when the probe is no longer weak compared to the system and bath
    /// rates, i.e. `Kt >= 0.1 (Jt + Vt)`. The closed-form results assume
    /// the opposite.
    pub fn probe_limit_warning(&self) -> bool {
        self.kt >= 0.1 * (self.jt + self.vt)
    }

    pub fn with_probe(&self, kt: f64) -> Result<Self> {
        Self::new(self.jt, self.vt, kt)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.jt * factor, self.vt * factor, self.kt * factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorControls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_max: f64,
    pub sample_stride: f64,
    /// Look-back window for plateau detection. `None` selects
    /// `20 / (n2b (1 − n2b) Jt)`.
    pub plateau_window: Option<f64>,
    pub plateau_tol: f64,
}

impl IntegratorControls {
    pub const DEFAULT_REL_TOL: f64 = 1e-9;
    pub const DEFAULT_ABS_TOL: f64 = 1e-12;
    pub const DEFAULT_PLATEAU_TOL: f64 = 1e-6;
    pub const DEFAULT_SAMPLES: usize = 4000;

    /// Defaults for a run of length `t_max` sampled at 4000 intervals.
    pub fn new(t_max: f64) -> Self {
        Self {
            rel_tol: Self::DEFAULT_REL_TOL,
            abs_tol: Self::DEFAULT_ABS_TOL,
            max_step: t_max,
            t_max,
            sample_stride: t_max / Self::DEFAULT_SAMPLES as f64,
            plateau_window: None,
            plateau_tol: Self::DEFAULT_PLATEAU_TOL,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(invalid(format!("{name} must lie in (0, 1e-2], got {v}")));
            }
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(invalid(format!("t_max must be positive and finite, got {}", self.t_max)));
        }
        if !(self.max_step > 0.0) {
            return Err(invalid(format!("max_step must be positive, got {}", self.max_step)));
        }
        if !(self.sample_stride > 0.0 && self.sample_stride <= self.t_max) {
            return Err(invalid(format!(
                "sample_stride must lie in (0, t_max], got {}",
                self.sample_stride
            )));
        }
        if self.t_max / self.sample_stride > 1e8 {
            return Err(invalid("sample grid would exceed 1e8 points"));
        }
        if let Some(w) = self.plateau_window {
            if !(w.is_finite() && w > 0.0) {
                return Err(invalid(format!("plateau_window must be positive, got {w}")));
            }
        }
        if !(self.plateau_tol > 0.0) {
            return Err(invalid(format!("plateau_tol must be positive, got {}", self.plateau_tol)));
        }
        Ok(())
    }

    /// Sample times `0, stride, 2·stride, …, t_max`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_max / self.sample_stride).ceil() as usize;
        let mut times: Vec<f64> = (0..n)
            .map(|i| i as f64 * self.sample_stride)
            .take_while(|&t| t < self.t_max)
            .collect();
        times.push(self.t_max);
        times
    }
}

/// Value the entropy settled at and the time from which it stayed there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Plateau {
    pub value: f64,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub f3: Vec<f64>,
    pub entropy: Vec<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub plateau: Option<Plateau>,
    pub couplings: EffectiveCouplings,
    pub thermal: ThermalPoint,
}

impl Trajectory {
    /// First time the entropy reaches half of its plateau value, linearly
    /// interpolated between samples. `None` without a nonzero plateau.
    pub fn half_rise_time(&self) -> Option<f64> {
        let plateau = self.plateau?;
        if plateau.value.abs() <= f64::MIN_POSITIVE {
            return None;
        }
        let half = 0.5 * plateau.value;
        let above = |s: f64| if half > 0.0 { s >= half } else { s <= half };
        let i = self.entropy.iter().position(|&s| above(s))?;
        if i == 0 {
            return Some(self.times[0]);
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (s0, s1) = (self.entropy[i - 1], self.entropy[i]);
        Some(t0 + (half - s0) / (s1 - s0) * (t1 - t0))
    }

    pub fn final_entropy(&self) -> f64 {
        *self.entropy.last().expect("trajectory has at least one sample")
    }

    /// CSV with header `time,f3,entropy`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,f3,entropy\n");
        for ((t, f), s) in self.times.iter().zip(&self.f3).zip(&self.entropy) {
            writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(*f), fmt_f64(*s)).unwrap();
        }
        out
    }
}

/// Rate of change of `f3` on the slaved manifold, including the probe drive.
///
/// Evaluated in the factored form `w³ (c − 1)(J̃ c (c + 1) − Ṽ)` with
/// `c = f3 / w`, so the rate is exactly zero at `f3 = w` without the probe.
pub fn reduced_rhs(f3: f64, couplings: &EffectiveCouplings, thermal: &ThermalPoint) -> f64 {
    let w = thermal.w2b();
    let c = f3 / w;
    let (j, v, k) = (couplings.jt, couplings.vt, couplings.kt);
    w * w * w * (c - 1.0) * (j * c * (c + 1.0) - v) + k * probe_drive(f3, thermal)
}

/// Derivative of [`reduced_rhs`] with respect to `f3`.
pub fn reduced_rhs_slope(f3: f64, couplings: &EffectiveCouplings, thermal: &ThermalPoint) -> f64 {
    let w2 = thermal.w2b().powi(2);
    -w2 * (couplings.vt + couplings.jt) + 3.0 * couplings.jt * f3 * f3 - couplings.kt * w2
}

fn probe_drive(f3: f64, thermal: &ThermalPoint) -> f64 {
    -thermal.w2b().powi(2) * f3
}

/// Right-hand side over the full six-component state.
///
/// This is the extension point for richer collision models; the crate
/// ships [`SlavedCubic`].
pub trait CollisionModel {
    fn rates(&self, state: &DistributionState) -> [f64; 6];
}

/// The slaved reduction lifted to six components: `f3` follows the cubic
/// flow and `f4`, `f5` are dragged along, everything else is frozen.
#[derive(Debug, Clone, Copy)]
pub struct SlavedCubic {
    pub couplings: EffectiveCouplings,
    pub thermal: ThermalPoint,
}

impl CollisionModel for SlavedCubic {
    fn rates(&self, state: &DistributionState) -> [f64; 6] {
        let df3 = reduced_rhs(state.f3(), &self.couplings, &self.thermal);
        let w = self.thermal.w2b();
        [
            0.0,
            0.0,
            0.0,
            df3,
            self.thermal.n2b() * df3 / w,
            self.thermal.hole() * df3 / w,
        ]
    }
}

struct ModelSystem<'a, M>(&'a M);

impl<M: CollisionModel> OdeSystem<6> for ModelSystem<'_, M> {
    fn rhs(&self, _t: f64, y: &[f64; 6]) -> [f64; 6] {
        // The guard keeps accepted states physical; trial stages may stray
        // slightly, so rates are evaluated on the raw components.
        self.0.rates(&DistributionState::new_unchecked(*y))
    }
}

fn step_control(controls: &IntegratorControls) -> StepControl {
    StepControl {
        rel_tol: controls.rel_tol,
        abs_tol: controls.abs_tol,
        max_step: controls.max_step,
    }
}

/// Integrate any [`CollisionModel`] from `init`, returning the state at each
/// sample time. Fails as soon as an accepted state leaves the physicality
/// window.
pub fn integrate_model<M: CollisionModel>(
    model: &M,
    init: DistributionState,
    controls: &IntegratorControls,
) -> Result<Vec<(f64, DistributionState)>> {
    controls.validate()?;
    let times = controls.sample_times();
    let sol = ode::integrate(
        &ModelSystem(model),
        init.components(),
        &times,
        &step_control(controls),
        |y| DistributionState::new(*y).is_ok(),
    )
    .map_err(|e| match e {
        OdeError::Guard { t, y } => Error::BlowUp { time: t, f3: y[3], bound: 1.0 },
        OdeError::StepUnderflow { t, y } => Error::IntegrationFailure {
            time: t,
            f3: y[3],
            reason: "step size underflow".into(),
        },
        OdeError::NonFinite { t, y } => Error::IntegrationFailure {
            time: t,
            f3: y[3],
            reason: "non-finite state".into(),
        },
    })?;
    sol.times
        .into_iter()
        .zip(sol.states)
        .map(|(t, y)| Ok((t, DistributionState::new(y)?)))
        .collect()
}

/// Integrate the slaved flow on `[0, t_max]`.
///
/// `f3_init` defaults to `w2b`, the value at the impulse.
pub fn integrate(
    couplings: &EffectiveCouplings,
    thermal: &ThermalPoint,
    controls: &IntegratorControls,
    f3_init: Option<f64>,
) -> Result<Trajectory> {
    controls.validate()?;
    if !(couplings.jt > 0.0) {
        return Err(invalid("Jt must be positive to set the time scale"));
    }
    let f3_0 = f3_init.unwrap_or(thermal.w2b());
    if !f3_0.is_finite() || f3_0.abs() > 1.0 {
        return Err(invalid(format!("f3_init = {f3_0} outside [-1, 1]")));
    }

    let sys = |_t: f64, y: &[f64; 1]| [reduced_rhs(y[0], couplings, thermal)];
    let times = controls.sample_times();
    let sol = ode::integrate(&sys, [f3_0], &times, &step_control(controls), |y| {
        y[0].abs() <= BLOW_UP_BOUND
    })
    .map_err(|e| match e {
        OdeError::Guard { t, y } => Error::BlowUp { time: t, f3: y[0], bound: BLOW_UP_BOUND },
        OdeError::StepUnderflow { t, y } => Error::IntegrationFailure {
            time: t,
            f3: y[0],
            reason: "step size underflow".into(),
        },
        OdeError::NonFinite { t, y } => Error::IntegrationFailure {
            time: t,
            f3: y[0],
            reason: "non-finite state".into(),
        },
    })?;

    let f3: Vec<f64> = sol.states.iter().map(|y| y[0]).collect();
    let entropy = f3
        .iter()
        .zip(&sol.times)
        .map(|(&f, &t)| {
            let expanded = SlavedState::new(f, *thermal)?
                .expand()
                .map_err(|_| Error::BlowUp { time: t, f3: f, bound: 1.0 })?;
            Ok(renyi_delta(&expanded))
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut traj = Trajectory {
        times: sol.times,
        f3,
        entropy,
        accepted_steps: sol.accepted,
        rejected_steps: sol.rejected,
        plateau: None,
        couplings: *couplings,
        thermal: *thermal,
    };
    let window = controls
        .plateau_window
        .unwrap_or(20.0 / (thermal.variance() * couplings.jt));
    traj.plateau = detect_plateau(&traj, window, controls.plateau_tol);
    Ok(traj)
}

/// Entropy at `t` by linear interpolation between samples.
fn entropy_at(traj: &Trajectory, t: f64) -> f64 {
    let i = traj.times.partition_point(|&s| s <= t);
    if i == 0 {
        return traj.entropy[0];
    }
    if i >= traj.times.len() {
        return *traj.entropy.last().unwrap();
    }
    let (t0, t1) = (traj.times[i - 1], traj.times[i]);
    let (s0, s1) = (traj.entropy[i - 1], traj.entropy[i]);
    s0 + (t - t0) / (t1 - t0) * (s1 - s0)
}

/// Earliest sample from which `|S(s) − S(s − window)| < tol` holds through
/// the end of the run, provided the final state sits at a stable point of
/// the flow (a state resting near the unstable point has not saturated).
pub fn detect_plateau(traj: &Trajectory, window: f64, tol: f64) -> Option<Plateau> {
    let t_end = *traj.times.last()?;
    if t_end < window {
        return None;
    }
    let f_end = *traj.f3.last()?;
    if reduced_rhs_slope(f_end, &traj.couplings, &traj.thermal) >= 0.0 {
        return None;
    }
    let mut start = None;
    for i in (0..traj.times.len()).rev() {
        let t = traj.times[i];
        if t < window {
            break;
        }
        if (traj.entropy[i] - entropy_at(traj, t - window)).abs() < tol {
            start = Some(i);
        } else {
            break;
        }
    }
    start.map(|i| Plateau {
        value: traj.final_entropy(),
        time: traj.times[i],
    })
}

/// `(s, δS(s))` pairs, recomputed from `f3` through the slaved expansion.
pub fn entropy_curve(trajectory: &Trajectory) -> Result<Vec<(f64, f64)>> {
    trajectory
        .times
        .iter()
        .zip(&trajectory.f3)
        .map(|(&t, &f)| {
            let s = SlavedState::new(f, trajectory.thermal)?.expand()?;
            Ok((t, renyi_delta(&s)))
        })
        .collect()
}
