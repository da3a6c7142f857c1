//! Closed-form results of the reduced flow and the diagnostics that compare
//! simulations against them.
//!
//! In the coordinate `c = f3 / w2b` and with `r = Ṽ/J̃`, the κ̃ → 0 flow is
//! `dc/ds = w2b² J̃ (c³ − (r + 1) c + r)`, which factorizes as
//! `(c − 1)(c² + c − r)`. The impulse starts the system at `c = 1`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::kinetics::{EffectiveCouplings, Trajectory};
use crate::thermo::ThermalPoint;

/// Relative tolerance for deciding that `Ṽ = 2J̃`.
pub const CRITICAL_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::Stable => "stable",
            Self::Unstable => "unstable",
            Self::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    /// Root in units of `w2b`.
    pub c: f64,
    /// The same root as a value of `f3`.
    pub f3: f64,
    /// `d(rhs)/d(f3)` at the root.
    pub slope: f64,
    pub stability: Stability,
    pub multiplicity: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSet {
    pub ratio: f64,
    /// Distinct roots, largest first.
    pub roots: Vec<FixedPoint>,
}

impl FixedPointSet {
    /// The stable root reached from `c = 1` when the probe pushes `f3` down:
    /// `(√(1 + 4r) − 1)/2` below threshold, `c = 1` itself at or above it.
    pub fn attractor(&self) -> FixedPoint {
        if self.ratio < 2.0 && !is_critical_ratio(self.ratio) {
            *self
                .roots
                .iter()
                .find(|p| p.stability == Stability::Stable)
                .expect("a stable root exists below threshold")
        } else {
            *self
                .roots
                .iter()
                .find(|p| (p.c - 1.0).abs() < 1e-9)
                .expect("c = 1 is always a root")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    Scrambling,
    Dissipative,
    Critical,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::Scrambling => "scrambling",
            Self::Dissipative => "dissipative",
            Self::Critical => "critical",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReport {
    pub phase: Phase,
    pub lyapunov: f64,
    pub saturation: f64,
    pub fixed_points: FixedPointSet,
    pub bath_ratio: f64,
    pub probe_ratio: f64,
    pub x: f64,
}

impl PhaseReport {
    pub const CSV_HEADER: &'static str =
        "Vt_over_Jt,Kt_over_Jt,x,phase,lyapunov,saturation_analytic";

    pub fn to_csv_record(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_f64(self.bath_ratio),
            fmt_f64(self.probe_ratio),
            fmt_f64(self.x),
            self.phase,
            fmt_f64(self.lyapunov),
            fmt_f64(self.saturation)
        )
    }
}

fn is_critical_ratio(r: f64) -> bool {
    (r - 2.0).abs() <= CRITICAL_REL_TOL * 2.0
}

pub fn phase_of(couplings: &EffectiveCouplings) -> Phase {
    let r = couplings.bath_ratio();
    if is_critical_ratio(r) {
        Phase::Critical
    } else if r < 2.0 {
        Phase::Scrambling
    } else {
        Phase::Dissipative
    }
}

/// `ϰ = n2b (1 − n2b)(2J̃ − Ṽ)`; negative in the dissipative phase, where it
/// is the decay rate of perturbations.
pub fn lyapunov_exponent(couplings: &EffectiveCouplings, thermal: &ThermalPoint) -> f64 {
    thermal.variance() * (2.0 * couplings.jt() - couplings.vt())
}

/// Roots of `c³ − (r + 1)c + r` with their stability under the κ̃ = 0 flow.
pub fn fixed_points(couplings: &EffectiveCouplings, thermal: &ThermalPoint) -> FixedPointSet {
    let r = couplings.bath_ratio();
    let disc = (1.0 + 4.0 * r).sqrt();
    let upper = (disc - 1.0) / 2.0;
    let lower = (-1.0 - disc) / 2.0;

    let mut cs: Vec<(f64, u8)> = vec![(1.0, 1)];
    if (upper - 1.0).abs() <= 1e-12 {
        cs[0].1 = 2;
    } else {
        cs.push((upper, 1));
    }
    cs.push((lower, 1));
    cs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let w = thermal.w2b();
    let scale = w * w * couplings.jt();
    let roots = cs
        .into_iter()
        .map(|(c, multiplicity)| {
            let shape = 3.0 * c * c - (r + 1.0);
            let stability = if shape.abs() <= 1e-12 * (r + 1.0) {
                Stability::Marginal
            } else if shape < 0.0 {
                Stability::Stable
            } else {
                Stability::Unstable
            };
            FixedPoint {
                c,
                f3: c * w,
                slope: scale * shape,
                stability,
                multiplicity,
            }
        })
        .collect();
    FixedPointSet { ratio: r, roots }
}

/// `δS(∞) = θ(2J̃ − Ṽ)(1 − 2√(n2b(1 − n2b)))(3 − √(1 + 4Ṽ/J̃))`, with θ(0) = 0.
pub fn saturation_entropy(couplings: &EffectiveCouplings, thermal: &ThermalPoint) -> f64 {
    if phase_of(couplings) != Phase::Scrambling {
        return 0.0;
    }
    let r = couplings.bath_ratio();
    (1.0 - 2.0 * thermal.variance().sqrt()) * (3.0 - (1.0 + 4.0 * r).sqrt())
}

pub fn classify(couplings: &EffectiveCouplings, thermal: &ThermalPoint) -> PhaseReport {
    let phase = phase_of(couplings);
    let lyapunov = match phase {
        Phase::Critical => 0.0,
        _ => lyapunov_exponent(couplings, thermal),
    };
    PhaseReport {
        phase,
        lyapunov,
        saturation: saturation_entropy(couplings, thermal),
        fixed_points: fixed_points(couplings, thermal),
        bath_ratio: couplings.bath_ratio(),
        probe_ratio: couplings.probe_ratio(),
        x: thermal.x(),
    }
}

/// Root of the probe-driven cubic `J̃(c³ − (r+1)c + r) − κ̃c` next to `c = 1`.
///
/// The drive moves the unstable point off `c = 1` by `≈ k/(2 − r)`; measuring
/// the growth from the moved point removes the `e^{ϰt} − 1` offset that
/// otherwise biases early samples.
fn driven_unstable_root(couplings: &EffectiveCouplings) -> f64 {
    let r = couplings.bath_ratio();
    let k = couplings.probe_ratio();
    let mut c = 1.0;
    for _ in 0..50 {
        let g = c * c * c - (r + 1.0) * c + r - k * c;
        let dg = 3.0 * c * c - (r + 1.0) - k;
        let step = g / dg;
        c -= step;
        if step.abs() <= 1e-15 * c.abs() {
            break;
        }
    }
    c
}

/// Exponential growth rate of `f3` away from the unstable point, by least
/// squares on `ln|f3 − f3_u|` over the window where the deviation lies in
/// `[10 (κ̃/J̃) w2b, 0.1 |w2b − f3_stable|]`.
pub fn fit_lyapunov(trajectory: &Trajectory, thermal: &ThermalPoint) -> Result<f64> {
    let couplings = &trajectory.couplings;
    if phase_of(couplings) != Phase::Scrambling {
        return Err(Error::InsufficientData(
            "no exponential-growth window outside the scrambling phase".into(),
        ));
    }
    let w = thermal.w2b();
    let stable = fixed_points(couplings, thermal).attractor().f3;
    let center = driven_unstable_root(couplings) * w;
    let lo = 10.0 * couplings.probe_ratio() * w;
    let hi = 0.1 * (w - stable).abs();
    if !(lo > 0.0) {
        return Err(Error::InsufficientData(
            "without a probe the trajectory never leaves the unstable point".into(),
        ));
    }

    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (&t, &f) in trajectory.times.iter().zip(&trajectory.f3) {
        let d = (f - center).abs();
        if d > 0.0 && d >= lo && d <= hi {
            ts.push(t);
            ys.push(d.ln());
        } else if !ts.is_empty() {
            break;
        }
    }
    if ts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} samples in the growth window [{lo:e}, {hi:e}]",
            ts.len()
        )));
    }
    Ok(least_squares_slope(&ts, &ys))
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingCurve {
    pub probe_ratio: f64,
    /// `ĝ` resampled on the common grid.
    pub g: Vec<f64>,
    /// `ĝ` is non-increasing along the raw samples.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collapse {
    /// Common scaling variable `(κ̃/J̃) e^{ϰt}`, log-spaced.
    pub grid: Vec<f64>,
    pub curves: Vec<ScalingCurve>,
    /// Largest spread across curves at any grid point.
    pub score: f64,
}

pub const COLLAPSE_GRID_POINTS: usize = 200;
const MONOTONE_SLACK: f64 = 1e-8;

/// Scaling collapse of entropy curves taken at different probe rates.
///
/// Each trajectory yields `ĝ(x) = 1 − δS(t)/δS(∞)` with
/// `x = (κ̃/J̃) e^{ϰt}`; the curves are compared on a shared log-x grid.
pub fn collapse(
    trajectories: &[Trajectory],
    couplings: &EffectiveCouplings,
    thermal: &ThermalPoint,
) -> Result<Collapse> {
    if trajectories.len() < 3 {
        return Err(Error::Precondition(format!(
            "collapse needs at least 3 trajectories, got {}",
            trajectories.len()
        )));
    }
    if phase_of(couplings) != Phase::Scrambling {
        return Err(Error::Precondition("collapse requires the scrambling phase".into()));
    }
    let kappa = lyapunov_exponent(couplings, thermal);

    let mut raw = Vec::with_capacity(trajectories.len());
    for traj in trajectories {
        let c = &traj.couplings;
        if c.jt() != couplings.jt() || c.vt() != couplings.vt() || traj.thermal != *thermal {
            return Err(Error::Precondition(
                "trajectories must share Jt, Vt and the thermal point".into(),
            ));
        }
        let k = c.probe_ratio();
        if !(k > 0.0) {
            return Err(Error::Precondition("every trajectory needs Kt > 0".into()));
        }
        let plateau = traj
            .plateau
            .filter(|p| p.value > 0.0)
            .ok_or_else(|| Error::Precondition(format!("trajectory at k = {k:e} is unsaturated")))?;
        let ln_x: Vec<f64> = traj.times.iter().map(|t| k.ln() + kappa * t).collect();
        let g: Vec<f64> = traj.entropy.iter().map(|s| 1.0 - s / plateau.value).collect();
        raw.push((k, ln_x, g));
    }

    let (k_min, k_max) = raw
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), (k, _, _)| (lo.min(*k), hi.max(*k)));
    if k_max / k_min < 100.0 * (1.0 - 1e-9) {
        return Err(Error::Precondition(
            "probe rates must span at least two decades".into(),
        ));
    }

    let lo = raw.iter().map(|(_, lx, _)| lx[0]).fold(f64::NEG_INFINITY, f64::max);
    let hi = raw
        .iter()
        .map(|(_, lx, _)| *lx.last().unwrap())
        .fold(f64::INFINITY, f64::min);
    if !(hi > lo) {
        return Err(Error::Precondition("trajectories share no common x range".into()));
    }
    let n = COLLAPSE_GRID_POINTS;
    let ln_grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();

    let curves: Vec<ScalingCurve> = raw
        .iter()
        .map(|(k, lx, g)| ScalingCurve {
            probe_ratio: *k,
            g: ln_grid.iter().map(|&u| interp(lx, g, u)).collect(),
            monotone: g.windows(2).all(|p| p[1] <= p[0] + MONOTONE_SLACK),
        })
        .collect();

    let score = (0..n)
        .map(|i| {
            let (mn, mx) = curves.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| {
                (a.min(c.g[i]), b.max(c.g[i]))
            });
            mx - mn
        })
        .fold(0.0, f64::max);

    Ok(Collapse {
        grid: ln_grid.iter().map(|u| u.exp()).collect(),
        curves,
        score,
    })
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v <= x);
    if i == 0 {
        return ys[0];
    }
    if i >= xs.len() {
        return *ys.last().unwrap();
    }
    let (x0, x1) = (xs[i - 1], xs[i]);
    ys[i - 1] + (x - x0) / (x1 - x0) * (ys[i] - ys[i - 1])
}
