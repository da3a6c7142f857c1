//! Run configuration for the command-line tool.
//!
//! A TOML document with one table per command. Physical inputs are the
//! dimensionless ratios `r = Ṽ/J̃`, `k = κ̃/J̃`, the detuning `x`, and the
//! reference rate `jt` (default 1). Integrator settings go in an optional
//! `integrator` sub-table:
//!
//! ```toml
//! [simulate]
//! r = 0.01
//! k = 1e-5
//! x = 0.5
//!
//! [simulate.integrator]
//! rel_tol = 1e-10
//!
//! [sweep]
//! r_grid = [0.0, 0.5, 1.0, 1.5, 1.9, 2.1, 2.5]
//! k_grid = [1e-6, 1e-4]
//! x = 0.5
//!
//! [fixed-points]
//! r = 6.0
//! x = 0.0
//!
//! [collapse]
//! r = 0.01
//! x = 0.5
//! k_list = [1e-5, 1e-6, 1e-7]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{EffectiveCouplings, IntegratorControls};
use crate::sweep::{default_t_max, SweepConfig};
use crate::thermo::{thermal_point, ThermalPoint};

fn default_jt() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub t_max: Option<f64>,
    pub sample_stride: Option<f64>,
    pub plateau_window: Option<f64>,
    pub plateau_tol: Option<f64>,
}

impl IntegratorSection {
    /// Controls with every unset field at its default; `fallback_t_max`
    /// applies when `t_max` is absent.
    pub fn controls(&self, fallback_t_max: f64) -> Result<IntegratorControls> {
        let t_max = self.t_max.unwrap_or(fallback_t_max);
        let mut c = IntegratorControls::new(t_max);
        if let Some(v) = self.rel_tol {
            c.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            c.abs_tol = v;
        }
        if let Some(v) = self.max_step {
            c.max_step = v;
        }
        if let Some(v) = self.sample_stride {
            c.sample_stride = v;
        }
        c.plateau_window = self.plateau_window;
        if let Some(v) = self.plateau_tol {
            c.plateau_tol = v;
        }
        c.validate()?;
        Ok(c)
    }

    fn is_set(&self) -> bool {
        *self != Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub r: f64,
    pub k: f64,
    pub x: f64,
    #[serde(default = "default_jt")]
    pub jt: f64,
    pub f3_init: Option<f64>,
    #[serde(default)]
    pub integrator: IntegratorSection,
}

impl SimulateSection {
    pub fn thermal(&self) -> Result<ThermalPoint> {
        thermal_point(self.x)
    }

    pub fn couplings(&self) -> Result<EffectiveCouplings> {
        EffectiveCouplings::from_ratios(self.jt, self.r, self.k)
    }

    pub fn controls(&self) -> Result<IntegratorControls> {
        let fallback = default_t_max(&self.couplings()?, &self.thermal()?);
        self.integrator.controls(fallback)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub r_grid: Vec<f64>,
    pub k_grid: Vec<f64>,
    pub x: f64,
    #[serde(default = "default_jt")]
    pub jt: f64,
    #[serde(default)]
    pub integrator: IntegratorSection,
}

impl SweepSection {
    /// Without an `integrator` table every cell gets its own run length.
    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let controls = if self.integrator.is_set() {
            let t_max = self.integrator.t_max.ok_or_else(|| {
                Error::Config("sweep integrator settings require an explicit t_max".into())
            })?;
            Some(self.integrator.controls(t_max)?)
        } else {
            None
        };
        let cfg = SweepConfig {
            r_grid: self.r_grid.clone(),
            k_grid: self.k_grid.clone(),
            x: self.x,
            jt: self.jt,
            controls,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointsSection {
    pub r: f64,
    #[serde(default)]
    pub x: f64,
    #[serde(default = "default_jt")]
    pub jt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseSection {
    pub r: f64,
    pub x: f64,
    pub k_list: Vec<f64>,
    #[serde(default = "default_jt")]
    pub jt: f64,
    #[serde(default)]
    pub integrator: IntegratorSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub simulate: Option<SimulateSection>,
    pub sweep: Option<SweepSection>,
    #[serde(rename = "fixed-points")]
    pub fixed_points: Option<FixedPointsSection>,
    pub collapse: Option<CollapseSection>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
