//! Kinetics of impulse-induced Rényi entropy in an open, scrambling system.
//!
//! A system of fermions coupled to a bath and, weakly, to a probe is kicked
//! by an impulse. The second Rényi entropy it acquires is carried by
//! inter-replica distribution functions on a doubled Keldysh contour, which
//! obey a generalized Boltzmann equation. In the flat-band limit that
//! equation collapses to a single cubic flow for `f3`, whose fixed-point
//! structure separates two phases:
//!
//! * **scrambling** (`Ṽ < 2J̃`): the initial state is unstable, the
//!   perturbation grows as `e^{ϰt}` and the entropy saturates at a value
//!   independent of the probe strength;
//! * **dissipative** (`Ṽ > 2J̃`): the perturbation decays and the entropy
//!   plateau is proportional to the probe rate.
//!
//! Modules, bottom-up:
//!
//! * [`thermo`]: thermal weights `w2b`, `n2b` of the doubled state;
//! * [`state`]: the six distribution functions, the 4×4 distribution matrix
//!   and the entropy functional;
//! * [`kinetics`]: the reduced flow, its adaptive integrator and trajectories;
//! * [`analytics`]: fixed points, Lyapunov exponent, saturation entropy,
//!   phase classification, exponent fits and scaling collapse;
//! * [`sweep`]: phase-diagram grids and their CSV tables;
//! * [`config`] and [`selfcheck`]: the pieces behind the command-line tool.
//!
//! ```
//! use entropy_kinetics::prelude::*;
//!
//! let thermal = thermal_point(0.5)?;
//! let couplings = EffectiveCouplings::from_ratios(1.0, 0.01, 1e-5)?;
//! let report = classify(&couplings, &thermal);
//! assert_eq!(report.phase, Phase::Scrambling);
//!
//! let t_max = default_t_max(&couplings, &thermal);
//! let traj = integrate(&couplings, &thermal, &IntegratorControls::new(t_max), None)?;
//! let plateau = traj.plateau.expect("saturated");
//! assert!((plateau.value - report.saturation).abs() < 1e-2 * report.saturation);
//! # Ok::<(), entropy_kinetics::Error>(())
//! ```

// `!(a <= b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod config;
pub mod error;
pub mod kinetics;
pub mod selfcheck;
pub mod state;
pub mod sweep;
pub mod thermo;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analytics::{
        classify, collapse, fit_lyapunov, fixed_points, lyapunov_exponent, saturation_entropy,
        Phase, PhaseReport, Stability,
    };
    pub use crate::kinetics::{
        entropy_curve, integrate, reduced_rhs, EffectiveCouplings, IntegratorControls, Trajectory,
    };
    pub use crate::state::{
        distribution_matrix, init_thermal, renyi_delta, DistributionState, SlavedState,
        TimeOrdering,
    };
    pub use crate::sweep::{default_t_max, run_sweep, sweep_to_table, SweepConfig};
    pub use crate::thermo::{thermal_point, ThermalPoint};
    pub use crate::Error;
}

/// Scientific notation with 17 significant digits; parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/thermal-weights.md")]
    mod thermal_weights {}
    #[doc = include_str!("../../../book/src/contour.md")]
    mod contour {}
    #[doc = include_str!("../../../book/src/reduced-flow.md")]
    mod reduced_flow {}
    #[doc = include_str!("../../../book/src/phases.md")]
    mod phases {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/scaling.md")]
    mod scaling {}
    #[doc = include_str!("../../../book/src/phase-diagram.md")]
    mod phase_diagram {}
}
