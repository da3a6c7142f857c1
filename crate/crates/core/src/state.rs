//! Distribution functions on the four-branch entropy contour.
//!
//! Two replicas of the Keldysh contour are glued by the swap boundary
//! condition that implements `tr ρ²`. Each replica has a forward (`u`) and a
//! backward (`d`) branch, giving four branches `(d1, u1, d2, u2)`. In the
//! flat-band limit the equal-time two-point function on this contour is
//! fixed by six real numbers `f0..f5`:
//!
//! * `f0` intra-replica occupation,
//! * `f1`, `f2` intra-replica anomalous weights,
//! * `f3`, `f4`, `f5` inter-replica weights.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::thermo::ThermalPoint;

/// Branch of the entropy contour, in matrix-index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContourBranch {
    D1,
    U1,
    D2,
    U2,
}

impl ContourBranch {
    pub const ALL: [ContourBranch; 4] = [Self::D1, Self::U1, Self::D2, Self::U2];

    pub fn index(self) -> usize {
        match self {
            Self::D1 => 0,
            Self::U1 => 1,
            Self::D2 => 2,
            Self::U2 => 3,
        }
    }

    /// `(−1)^s`: −1 on backward branches, +1 on forward branches.
    pub fn sign(self) -> f64 {
        match self {
            Self::D1 | Self::D2 => -1.0,
            Self::U1 | Self::U2 => 1.0,
        }
    }
}

/// Time ordering of the two operators in `G^{ss'}(t1, t2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeOrdering {
    /// `t1 > t2`
    Greater,
    /// `t1 < t2`
    Lesser,
}

pub type DistributionMatrix = [[f64; 4]; 4];

/// Largest magnitude any component may take before the state is considered
/// unphysical. A validation bound against integrator blow-up.
pub const PHYSICAL_BOUND: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistributionState {
    f: [f64; 6],
}

impl DistributionState {
    pub const FIELD_NAMES: [&'static str; 6] = ["f0", "f1", "f2", "f3", "f4", "f5"];

    pub fn new(f: [f64; 6]) -> Result<Self> {
        for (z, &v) in f.iter().enumerate() {
            if !v.is_finite() {
                return Err(invalid(format!("f{z} is not finite ({v})")));
            }
        }
        if !(0.0..=1.0).contains(&f[0]) {
            return Err(invalid(format!("f0 = {} outside [0, 1]", f[0])));
        }
        for (z, &v) in f.iter().enumerate().skip(1) {
            if v.abs() > PHYSICAL_BOUND {
                return Err(invalid(format!("|f{z}| = {} exceeds {PHYSICAL_BOUND}", v.abs())));
            }
        }
        Ok(Self { f })
    }

    pub(crate) fn new_unchecked(f: [f64; 6]) -> Self {
        Self { f }
    }

    pub fn components(&self) -> [f64; 6] {
        self.f
    }

    pub fn f(&self, z: usize) -> f64 {
        self.f[z]
    }

    pub fn f0(&self) -> f64 {
        self.f[0]
    }
    pub fn f1(&self) -> f64 {
        self.f[1]
    }
    pub fn f2(&self) -> f64 {
        self.f[2]
    }
    pub fn f3(&self) -> f64 {
        self.f[3]
    }
    pub fn f4(&self) -> f64 {
        self.f[4]
    }
    pub fn f5(&self) -> f64 {
        self.f[5]
    }

    pub fn csv_header() -> String {
        Self::FIELD_NAMES.join(",")
    }

    /// One CSV record, 17 significant digits per field.
    pub fn to_csv_record(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.f.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{}", crate::fmt_f64(*v)).unwrap();
        }
        out
    }
}

/// State of the non-interacting thermal ensemble at the impulse.
pub fn init_thermal(thermal: &ThermalPoint) -> DistributionState {
    let w = thermal.w2b();
    let n = thermal.n2b();
    DistributionState { f: [n, w, w, w, n, n] }
}

/// The 4×4 generalized distribution matrix in `(d1, u1, d2, u2)` order.
pub fn distribution_matrix(state: &DistributionState, ordering: TimeOrdering) -> DistributionMatrix {
    let [f0, f1, f2, f3, f4, f5] = state.f;
    let mut m = [
        [-f0, -f2, -f3, -f5],
        [f1, 1.0 - f0, -f4, -f3],
        [f3, f5, -f0, -f2],
        [f4, f3, f1, 1.0 - f0],
    ];
    if ordering == TimeOrdering::Lesser {
        for b in ContourBranch::ALL {
            m[b.index()][b.index()] -= b.sign();
        }
    }
    m
}

/// Impulse-induced second Rényi entropy carried by a distribution state.
pub fn renyi_delta(state: &DistributionState) -> f64 {
    let [_, f1, f2, f3, f4, f5] = state.f;
    2.0 - 2.0 * (f1 + f2) - 2.0 * (f4 + f5 - 2.0 * f3)
}

/// A state on the slaved manifold: single-replica functions frozen at their
/// thermal values and `f4`, `f5` locked to `f3` by the thermal weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlavedState {
    f3: f64,
    thermal: ThermalPoint,
}

impl SlavedState {
    pub fn new(f3: f64, thermal: ThermalPoint) -> Result<Self> {
        if !f3.is_finite() {
            return Err(invalid(format!("f3 is not finite ({f3})")));
        }
        Ok(Self { f3, thermal })
    }

    pub fn f3(&self) -> f64 {
        self.f3
    }

    pub fn thermal(&self) -> &ThermalPoint {
        &self.thermal
    }

    /// `f3 / w2b`, the coordinate in which the fixed points are universal.
    pub fn ratio(&self) -> f64 {
        self.f3 / self.thermal.w2b()
    }

    /// Components `[f0, …, f5]` without the physicality check.
    pub fn components(&self) -> [f64; 6] {
        let w = self.thermal.w2b();
        let n = self.thermal.n2b();
        let c = self.ratio();
        [n, w, w, self.f3, n * c, self.thermal.hole() * c]
    }

    pub fn expand(&self) -> Result<DistributionState> {
        DistributionState::new(self.components())
    }
}
