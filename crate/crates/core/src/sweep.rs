//! Grids over `(Ṽ/J̃, κ̃/J̃)`: numeric entropy plateaus next to the κ̃ → 0
//! prediction, one independent simulation per cell.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{classify, lyapunov_exponent, Phase};
use crate::error::{invalid, Error, Result};
use crate::fmt_f64;
use crate::kinetics::{integrate, EffectiveCouplings, IntegratorControls};
use crate::thermo::{thermal_point, ThermalPoint};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub r_grid: Vec<f64>,
    pub k_grid: Vec<f64>,
    pub x: f64,
    pub jt: f64,
    /// Controls applied verbatim to every cell. `None` picks
    /// [`default_t_max`] per cell with default tolerances.
    pub controls: Option<IntegratorControls>,
}

impl SweepConfig {
    pub fn new(r_grid: Vec<f64>, k_grid: Vec<f64>, x: f64) -> Self {
        Self {
            r_grid,
            k_grid,
            x,
            jt: 1.0,
            controls: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("r_grid", &self.r_grid), ("k_grid", &self.k_grid)] {
            if grid.is_empty() {
                return Err(invalid(format!("{name} is empty")));
            }
            if grid.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(invalid(format!("{name} values must be finite and >= 0")));
            }
            if grid.windows(2).any(|p| p[1] <= p[0]) {
                return Err(invalid(format!("{name} must be strictly increasing")));
            }
        }
        if !(self.jt > 0.0 && self.jt.is_finite()) {
            return Err(invalid(format!("Jt must be positive, got {}", self.jt)));
        }
        thermal_point(self.x)?;
        if let Some(c) = &self.controls {
            c.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub k: f64,
    pub x: f64,
    pub phase: Phase,
    pub lyapunov: f64,
    pub plateau_numeric: Option<f64>,
    pub saturation_analytic: f64,
    /// Half-rise time of the entropy.
    pub t_sat: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failures: usize,
}

/// Run length that covers the rise (`ln(1/k)/|ϰ|`), twenty e-foldings of
/// relaxation, and two plateau windows.
pub fn default_t_max(couplings: &EffectiveCouplings, thermal: &ThermalPoint) -> f64 {
    let floor = 1e-3 * thermal.variance() * couplings.jt();
    let rate = lyapunov_exponent(couplings, thermal).abs().max(floor);
    let k = couplings.probe_ratio();
    let rise = if k > 0.0 { (1.0 / k).ln().max(0.0) } else { 0.0 };
    let window = 20.0 / (thermal.variance() * couplings.jt());
    (rise + 20.0) / rate + 2.0 * window
}

fn run_cell(config: &SweepConfig, thermal: &ThermalPoint, r: f64, k: f64) -> SweepRow {
    let couplings = match EffectiveCouplings::from_ratios(config.jt, r, k) {
        Ok(c) => c,
        Err(e) => {
            return SweepRow {
                r,
                k,
                x: config.x,
                phase: Phase::Critical,
                lyapunov: f64::NAN,
                plateau_numeric: None,
                saturation_analytic: f64::NAN,
                t_sat: None,
                error: Some(e.to_string()),
            }
        }
    };
    let report = classify(&couplings, thermal);
    let controls = config
        .controls
        .unwrap_or_else(|| IntegratorControls::new(default_t_max(&couplings, thermal)));
    let mut row = SweepRow {
        r,
        k,
        x: config.x,
        phase: report.phase,
        lyapunov: report.lyapunov,
        plateau_numeric: None,
        saturation_analytic: report.saturation,
        t_sat: None,
        error: None,
    };
    match integrate(&couplings, thermal, &controls, None) {
        Ok(traj) => match traj.plateau {
            Some(p) => {
                row.plateau_numeric = Some(p.value);
                row.t_sat = traj.half_rise_time();
            }
            None => row.error = Some("entropy did not reach a plateau".into()),
        },
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Every `(r, k)` cell in row-major order (`r` outer). Cells run on up to
/// `jobs` threads; the output does not depend on `jobs`.
pub fn run_sweep(config: &SweepConfig, jobs: usize) -> Result<SweepOutcome> {
    config.validate()?;
    let thermal = thermal_point(config.x)?;
    let cells: Vec<(f64, f64)> = config
        .r_grid
        .iter()
        .flat_map(|&r| config.k_grid.iter().map(move |&k| (r, k)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(r, k)| run_cell(config, &thermal, r, k))
            .collect()
    });
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(SweepOutcome { rows, failures })
}

pub const TABLE_HEADER: &str = "r,k,x,phase,lyapunov,plateau_numeric,saturation_analytic,t_sat";

/// CSV table of a sweep. Failed cells carry `NaN` in `plateau_numeric`;
/// an absent `t_sat` is an empty field.
pub fn sweep_to_table(rows: &[SweepRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(row.r),
            fmt_f64(row.k),
            fmt_f64(row.x),
            row.phase,
            fmt_f64(row.lyapunov),
            fmt_f64(row.plateau_numeric.unwrap_or(f64::NAN)),
            fmt_f64(row.saturation_analytic),
            row.t_sat.map(fmt_f64).unwrap_or_default(),
        )
        .unwrap();
    }
    out
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    failures: usize,
    cells: usize,
    config: &'a SweepConfig,
    failed: Vec<FailedCell<'a>>,
}

#[derive(Serialize)]
struct FailedCell<'a> {
    r: f64,
    k: f64,
    error: &'a str,
}

/// TOML record echoing the configuration and the failures.
pub fn sweep_manifest(config: &SweepConfig, outcome: &SweepOutcome) -> String {
    let manifest = Manifest {
        command: "sweep",
        failures: outcome.failures,
        cells: outcome.rows.len(),
        config,
        failed: outcome
            .rows
            .iter()
            .filter_map(|row| {
                row.error.as_deref().map(|error| FailedCell { r: row.r, k: row.k, error })
            })
            .collect(),
    };
    toml::to_string(&manifest).expect("manifest serializes")
}
