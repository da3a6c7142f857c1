//! Embedded invariant suite behind the `selfcheck` command.

use crate::analytics::{fixed_points, lyapunov_exponent, saturation_entropy, Stability};
use crate::kinetics::{integrate, reduced_rhs, EffectiveCouplings, IntegratorControls};
use crate::state::{renyi_delta, SlavedState};
use crate::sweep::default_t_max;
use crate::thermo::thermal_point;

/// Reference values the checks compare against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    /// `w2b` at `x = ln(3)/2`: `√3/4`.
    pub quarter_w2b: f64,
    /// `n2b` at `x = ln(3)/2`.
    pub quarter_n2b: f64,
    /// `ϰ` at `x = ln(3)/2`, `J̃ = 1`, `Ṽ = 0`.
    pub quarter_lyapunov: f64,
    /// `δS(∞)` at `x = ln(3)/2`, `Ṽ = 0`: `2 − √3`.
    pub quarter_saturation: f64,
    /// Relative tolerance of numeric plateaus against the closed form.
    pub plateau_rel_tol: f64,
}

impl Default for Reference {
    fn default() -> Self {
        Self {
            quarter_w2b: 0.433_012_701_892_219_3,
            quarter_n2b: 0.25,
            quarter_lyapunov: 0.375,
            quarter_saturation: 0.267_949_192_431_122_7,
            plateau_rel_tol: 1e-2,
        }
    }
}

pub type CheckFn = fn(&Reference) -> Result<(), String>;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub result: Result<(), String>,
}

#[derive(Debug, Clone)]
pub struct SelfCheckReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.result.is_ok())
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| o.result.is_err())
    }
}

pub fn default_checks() -> Vec<(&'static str, CheckFn)> {
    vec![
        ("thermal identity", thermal_identity),
        ("thermal reference values", thermal_reference),
        ("fixed-point residuals", fixed_point_residuals),
        ("lyapunov exponent", lyapunov_checks),
        ("saturation entropy", saturation_checks),
        ("numeric plateaus", plateau_spot_checks),
    ]
}

pub fn run(reference: &Reference) -> SelfCheckReport {
    run_checks(&default_checks(), reference)
}

pub fn run_checks(checks: &[(&'static str, CheckFn)], reference: &Reference) -> SelfCheckReport {
    SelfCheckReport {
        outcomes: checks
            .iter()
            .map(|&(name, check)| CheckOutcome {
                name,
                result: check(reference),
            })
            .collect(),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn thermal_identity(_: &Reference) -> Result<(), String> {
    for i in 0..1000 {
        let x = -10.0 + 20.0 * i as f64 / 999.0;
        let t = thermal_point(x).map_err(|e| e.to_string())?;
        let gap = (t.w2b().powi(2) - t.n2b() * (1.0 - t.n2b())).abs();
        ensure(gap <= 1e-12, || format!("w² − n(1−n) = {gap:e} at x = {x}"))?;
    }
    Ok(())
}

fn thermal_reference(reference: &Reference) -> Result<(), String> {
    let t = thermal_point(3f64.ln() / 2.0).map_err(|e| e.to_string())?;
    ensure(close(t.w2b(), reference.quarter_w2b, 1e-14), || {
        format!("w2b = {} expected {}", t.w2b(), reference.quarter_w2b)
    })?;
    ensure(close(t.n2b(), reference.quarter_n2b, 1e-14), || {
        format!("n2b = {} expected {}", t.n2b(), reference.quarter_n2b)
    })
}

fn fixed_point_residuals(_: &Reference) -> Result<(), String> {
    let thermal = thermal_point(0.3).map_err(|e| e.to_string())?;
    for r in [0.0, 0.5, 1.0, 2.0, 2.5, 6.0] {
        let c = EffectiveCouplings::from_ratios(1.0, r, 0.0).map_err(|e| e.to_string())?;
        let set = fixed_points(&c, &thermal);
        for p in &set.roots {
            let res = p.c.powi(3) - (r + 1.0) * p.c + r;
            ensure(res.abs() <= 1e-12, || format!("residual {res:e} at r = {r}, c = {}", p.c))?;
        }
        let unit = set.roots.iter().find(|p| p.c == 1.0).ok_or("c = 1 missing")?;
        let expected = if r < 2.0 {
            Stability::Unstable
        } else if r > 2.0 {
            Stability::Stable
        } else {
            Stability::Marginal
        };
        ensure(unit.stability == expected, || {
            format!("c = 1 is {} at r = {r}, expected {expected}", unit.stability)
        })?;
    }
    Ok(())
}

fn lyapunov_checks(reference: &Reference) -> Result<(), String> {
    let quarter = thermal_point(3f64.ln() / 2.0).map_err(|e| e.to_string())?;
    let c = EffectiveCouplings::new(1.0, 0.0, 0.0).map_err(|e| e.to_string())?;
    let kappa = lyapunov_exponent(&c, &quarter);
    ensure(close(kappa, reference.quarter_lyapunov, 1e-14), || {
        format!("ϰ = {kappa} expected {}", reference.quarter_lyapunov)
    })?;
    for r in [0.0, 1.0, 1.9, 2.5] {
        let c = EffectiveCouplings::from_ratios(1.0, r, 0.0).map_err(|e| e.to_string())?;
        let w = quarter.w2b();
        let h = 1e-6 * w;
        let fd = (reduced_rhs(w + h, &c, &quarter) - reduced_rhs(w - h, &c, &quarter)) / (2.0 * h);
        let kappa = lyapunov_exponent(&c, &quarter);
        ensure((fd - kappa).abs() <= 1e-6 * kappa.abs(), || {
            format!("finite difference {fd} vs ϰ = {kappa} at r = {r}")
        })?;
    }
    Ok(())
}

fn saturation_checks(reference: &Reference) -> Result<(), String> {
    let quarter = thermal_point(3f64.ln() / 2.0).map_err(|e| e.to_string())?;
    let c = EffectiveCouplings::new(1.0, 0.0, 0.0).map_err(|e| e.to_string())?;
    let s = saturation_entropy(&c, &quarter);
    ensure(close(s, reference.quarter_saturation, 1e-14), || {
        format!("δS(∞) = {s} expected {}", reference.quarter_saturation)
    })?;
    for (r, x) in [(0.3, 0.2), (1.0, -0.7), (1.7, 1.4)] {
        let thermal = thermal_point(x).map_err(|e| e.to_string())?;
        let c = EffectiveCouplings::from_ratios(1.0, r, 0.0).map_err(|e| e.to_string())?;
        let stable = fixed_points(&c, &thermal).attractor();
        let expanded = SlavedState::new(stable.f3, thermal)
            .and_then(|s| s.expand())
            .map_err(|e| e.to_string())?;
        let direct = renyi_delta(&expanded);
        let closed = saturation_entropy(&c, &thermal);
        ensure(close(direct, closed, 1e-10), || {
            format!("entropy at stable point {direct} vs closed form {closed} (r = {r}, x = {x})")
        })?;
    }
    Ok(())
}

fn plateau_spot_checks(reference: &Reference) -> Result<(), String> {
    let thermal = thermal_point(0.5).map_err(|e| e.to_string())?;
    for r in [0.0, 1.0, 1.9, 2.5] {
        let c = EffectiveCouplings::from_ratios(1.0, r, 1e-6).map_err(|e| e.to_string())?;
        let controls = IntegratorControls::new(default_t_max(&c, &thermal));
        let traj = integrate(&c, &thermal, &controls, None).map_err(|e| e.to_string())?;
        let plateau = traj.plateau.ok_or_else(|| format!("no plateau at r = {r}"))?;
        let expected = saturation_entropy(&c, &thermal);
        let tol = (reference.plateau_rel_tol * expected).max(1e-3);
        ensure(close(plateau.value, expected, tol), || {
            format!("plateau {} vs analytic {expected} at r = {r}", plateau.value)
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let report = run(&Reference::default());
        let failed: Vec<_> = report.failed().map(|o| (o.name, o.result.clone())).collect();
        assert!(report.passed(), "{failed:?}");
        assert_eq!(report.outcomes.len(), 6);
    }

    #[test]
    fn corrupted_constant_is_caught() {
        let mut reference = Reference::default();
        reference.quarter_w2b *= 1.0 + 1e-9;
        let report = run(&reference);
        assert!(!report.passed());
        let failed: Vec<_> = report.failed().map(|o| o.name).collect();
        assert_eq!(failed, vec!["thermal reference values"]);
    }

    #[test]
    fn corrupted_saturation_is_caught() {
        let reference = Reference {
            quarter_saturation: 0.27,
            ..Reference::default()
        };
        assert!(!run(&reference).passed());
    }
}
