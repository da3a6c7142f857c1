//! Thermal weights of the doubled (inverse temperature 2β) flat-band state.
//!
//! Everything depends on the single detuning `x = β(ε − μ)`:
//!
//! * `w2b = 1 / (2 cosh x)`, the anomalous inter-replica weight,
//! * `n2b = 1 / (e^{2x} + 1)`, the occupation at inverse temperature 2β.
//!
//! The two satisfy `w2b² = n2b (1 − n2b)`, which is what makes the
//! Lyapunov exponent and the saturation entropy expressible through either.

use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalPoint {
    x: f64,
    w2b: f64,
    n2b: f64,
    /// `1 − n2b`, evaluated without cancellation.
    n2b_hole: f64,
}

impl ThermalPoint {
    pub fn new(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(invalid(format!("detuning x must be finite, got {x}")));
        }
        // Beyond |x| ~ 354 the weight underflows and the slaving relations
        // (which divide by w2b) stop being representable.
        let w2b = 0.5 / x.cosh();
        if !(w2b > 0.0) || !w2b.is_normal() {
            return Err(invalid(format!(
                "detuning x = {x} is too large: thermal weight underflows"
            )));
        }
        let n2b = 1.0 / ((2.0 * x).exp() + 1.0);
        let n2b_hole = 1.0 / ((-2.0 * x).exp() + 1.0);
        Ok(Self { x, w2b, n2b, n2b_hole })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn w2b(&self) -> f64 {
        self.w2b
    }

    pub fn n2b(&self) -> f64 {
        self.n2b
    }

    /// `1 − n2b`.
    pub fn hole(&self) -> f64 {
        self.n2b_hole
    }

    /// `n2b (1 − n2b)`, the prefactor of the Lyapunov exponent.
    pub fn variance(&self) -> f64 {
        self.n2b * self.n2b_hole
    }
}

/// Free-function form of [`ThermalPoint::new`].
pub fn thermal_point(x: f64) -> Result<ThermalPoint> {
    ThermalPoint::new(x)
}
