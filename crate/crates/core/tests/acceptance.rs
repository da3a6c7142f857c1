//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::time::Instant;

use entropy_kinetics::analytics::{
    collapse, fit_lyapunov, fixed_points, lyapunov_exponent, saturation_entropy, Stability,
};
use entropy_kinetics::kinetics::{integrate, reduced_rhs, EffectiveCouplings, IntegratorControls, Trajectory};
use entropy_kinetics::state::{renyi_delta, SlavedState};
use entropy_kinetics::sweep::{default_t_max, run_sweep, sweep_to_table, SweepConfig};
use entropy_kinetics::thermo::{thermal_point, ThermalPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn couplings(r: f64, k: f64) -> EffectiveCouplings {
    EffectiveCouplings::from_ratios(1.0, r, k).expect("valid couplings")
}

fn thermal(x: f64) -> ThermalPoint {
    thermal_point(x).expect("finite x")
}

fn simulate(r: f64, k: f64, x: f64) -> Result<Trajectory, String> {
    let c = couplings(r, k);
    let t = thermal(x);
    integrate(&c, &t, &IntegratorControls::new(default_t_max(&c, &t)), None)
        .map_err(|e| format!("r = {r}, k = {k:e}, x = {x}: {e}"))
}

fn plateau(r: f64, k: f64, x: f64) -> Result<f64, String> {
    simulate(r, k, x)?
        .plateau
        .map(|p| p.value)
        .ok_or_else(|| format!("no plateau at r = {r}, k = {k:e}, x = {x}"))
}

fn thermal_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let t = thermal(rng.gen_range(-10.0..=10.0));
        worst = worst.max((t.w2b().powi(2) - t.n2b() * (1.0 - t.n2b())).abs());
    }
    if worst <= 1e-12 {
        Ok(format!("max |w² − n(1−n)| = {worst:.2e} over 1000 draws"))
    } else {
        Err(format!("max |w² − n(1−n)| = {worst:.2e} > 1e-12"))
    }
}

fn fixed_point_structure() -> Check {
    let t = thermal(0.5);
    for r in [0.0, 0.5, 1.0, 2.0, 2.5, 6.0] {
        let set = fixed_points(&couplings(r, 0.0), &t);
        let disc = (1.0f64 + 4.0 * r).sqrt();
        let expected = [1.0, (-1.0 + disc) / 2.0, (-1.0 - disc) / 2.0];
        for want in expected {
            let found = set.roots.iter().any(|p| (p.c - want).abs() <= 1e-12);
            if !found {
                return Err(format!("r = {r}: root {want} missing"));
            }
        }
        for p in &set.roots {
            let residual = p.c.powi(3) - (r + 1.0) * p.c + r;
            if residual.abs() > 1e-12 {
                return Err(format!("r = {r}: residual {residual:e} at c = {}", p.c));
            }
        }
    }
    let unit = |r: f64| {
        fixed_points(&couplings(r, 0.0), &t)
            .roots
            .iter()
            .find(|p| p.c == 1.0)
            .map(|p| p.stability)
    };
    let labels = [
        (1.999_999, Stability::Unstable),
        (2.0, Stability::Marginal),
        (2.000_001, Stability::Stable),
    ];
    for (r, want) in labels {
        if unit(r) != Some(want) {
            return Err(format!("c = 1 at r = {r} is {:?}, expected {want}", unit(r)));
        }
    }
    for r in [0.0, 0.5, 1.0] {
        if unit(r) != Some(Stability::Unstable) {
            return Err(format!("c = 1 should be unstable at r = {r}"));
        }
    }
    for r in [2.5, 6.0] {
        if unit(r) != Some(Stability::Stable) {
            return Err(format!("c = 1 should be stable at r = {r}"));
        }
    }
    Ok("roots match, residuals <= 1e-12, c = 1 flips stability at r = 2".into())
}

fn lyapunov_consistency() -> Check {
    let mut worst_fd = 0.0f64;
    let mut worst_fit = 0.0f64;
    for r in [0.0, 1.0, 1.9] {
        for x in [0.2, 3f64.ln() / 2.0, 1.0] {
            let t = thermal(x);
            let c = couplings(r, 0.0);
            let exact = lyapunov_exponent(&c, &t);
            let w = t.w2b();
            let h = 1e-6 * w;
            let fd = (reduced_rhs(w + h, &c, &t) - reduced_rhs(w - h, &c, &t)) / (2.0 * h);
            let rel_fd = ((fd - exact) / exact).abs();
            worst_fd = worst_fd.max(rel_fd);
            if rel_fd > 1e-6 {
                return Err(format!("finite difference off by {rel_fd:.2e} at r = {r}, x = {x}"));
            }
            let traj = simulate(r, 1e-8, x)?;
            let fit = fit_lyapunov(&traj, &t).map_err(|e| format!("r = {r}, x = {x}: {e}"))?;
            let rel_fit = ((fit - exact) / exact).abs();
            worst_fit = worst_fit.max(rel_fit);
            if rel_fit > 0.02 {
                return Err(format!("fit {fit} vs {exact} ({rel_fit:.2e}) at r = {r}, x = {x}"));
            }
        }
    }
    Ok(format!(
        "9 points; worst finite-difference error {worst_fd:.2e}, worst fit error {worst_fit:.2e}"
    ))
}

fn saturation_reproduction() -> Check {
    let x = 0.5;
    let t = thermal(x);
    let mut worst = String::new();
    let mut worst_ratio = 0.0f64;
    for r in [0.0, 0.5, 1.0, 1.5, 1.9, 2.1, 2.5] {
        let numeric = plateau(r, 1e-6, x)?;
        let analytic = saturation_entropy(&couplings(r, 0.0), &t);
        let tol = if analytic > 0.0 { 0.01 * analytic } else { 1e-3 };
        let err = (numeric - analytic).abs();
        if err > tol {
            return Err(format!("r = {r}: plateau {numeric} vs analytic {analytic}"));
        }
        if err / tol > worst_ratio {
            worst_ratio = err / tol;
            worst = format!("r = {r}");
        }
    }
    Ok(format!("7 ratios within tolerance; tightest at {worst} ({:.0}% of budget)", 100.0 * worst_ratio))
}

fn dissipative_proportionality() -> Check {
    let ks = [1e-2, 1e-3, 1e-4];
    let mut scaled = Vec::new();
    for k in ks {
        scaled.push(plateau(2.5, k, 0.5)? / k);
    }
    let hi = scaled.iter().cloned().fold(f64::MIN, f64::max);
    let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
    let spread = hi / lo - 1.0;
    if spread <= 0.05 {
        Ok(format!("plateau/k in [{lo:.5}, {hi:.5}], spread {:.2}%", 100.0 * spread))
    } else {
        Err(format!("plateau/k spread {:.2}% > 5%", 100.0 * spread))
    }
}

fn saturation_delay() -> Check {
    let (r, x) = (0.01, 0.5);
    let kappa = lyapunov_exponent(&couplings(r, 0.0), &thermal(x));
    let expected = 10f64.ln() / kappa;
    let t_sat = |k: f64| -> Result<f64, String> {
        simulate(r, k, x)?
            .half_rise_time()
            .ok_or_else(|| format!("no saturation time at k = {k:e}"))
    };
    let (a, b, c) = (t_sat(1e-4)?, t_sat(1e-5)?, t_sat(1e-6)?);
    let mut details = Vec::new();
    for (label, delay) in [("1e-4→1e-5", b - a), ("1e-5→1e-6", c - b)] {
        let rel = (delay - expected).abs() / expected;
        if rel > 0.05 {
            return Err(format!("{label}: delay {delay} vs ln(10)/ϰ = {expected}"));
        }
        details.push(format!("{label} off by {:.3}%", 100.0 * rel));
    }
    Ok(details.join(", "))
}

fn scaling_collapse() -> Check {
    let (r, x) = (0.01, 0.5);
    let trajs = [1e-5, 1e-6, 1e-7]
        .iter()
        .map(|&k| simulate(r, k, x))
        .collect::<Result<Vec<_>, _>>()?;
    let col = collapse(&trajs, &couplings(r, 0.0), &thermal(x)).map_err(|e| e.to_string())?;
    if let Some(c) = col.curves.iter().find(|c| !c.monotone) {
        return Err(format!("ĝ not monotone at k = {:e}", c.probe_ratio));
    }
    if col.score > 0.05 {
        return Err(format!("collapse spread {} > 0.05", col.score));
    }
    Ok(format!("max spread {:.2e}, all curves non-increasing", col.score))
}

fn cross_module_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let r = rng.gen_range(0.0..2.0);
        let x = rng.gen_range(-3.0..3.0);
        let t = thermal(x);
        let c = couplings(r, 0.0);
        let attractor = fixed_points(&c, &t).attractor();
        let state = SlavedState::new(attractor.f3, t)
            .and_then(|s| s.expand())
            .map_err(|e| e.to_string())?;
        let gap = (renyi_delta(&state) - saturation_entropy(&c, &t)).abs();
        worst = worst.max(gap);
        if gap > 1e-10 {
            return Err(format!("gap {gap:e} at r = {r}, x = {x}"));
        }
    }
    Ok(format!("50 draws, max gap {worst:.2e}"))
}

fn determinism() -> Check {
    let cfg = SweepConfig::new(vec![0.0, 0.5, 1.0, 1.9, 2.5], vec![1e-6, 1e-4], 0.5);
    let a = run_sweep(&cfg, 1).map_err(|e| e.to_string())?;
    let b = run_sweep(&cfg, 4).map_err(|e| e.to_string())?;
    if a.failures + b.failures > 0 {
        return Err("sweep cells failed".into());
    }
    if sweep_to_table(&a.rows).as_bytes() != sweep_to_table(&b.rows).as_bytes() {
        return Err("sweep tables differ between runs".into());
    }
    let mut worst = 0.0f64;
    for (r, k) in [(0.01, 1e-5), (1.0, 1e-6), (2.5, 1e-3)] {
        let c = couplings(r, k);
        let t = thermal(0.5);
        let base = IntegratorControls::new(default_t_max(&c, &t));
        let finer = base.with_rel_tol(base.rel_tol / 2.0);
        let s1 = integrate(&c, &t, &base, None).map_err(|e| e.to_string())?.final_entropy();
        let s2 = integrate(&c, &t, &finer, None).map_err(|e| e.to_string())?.final_entropy();
        let change = (s1 - s2).abs();
        worst = worst.max(change / base.rel_tol);
        if change >= base.rel_tol {
            return Err(format!("halving rel_tol moved δS(t_max) by {change:e} at r = {r}"));
        }
    }
    Ok(format!(
        "identical CSV across job counts; refinement change <= {worst:.2}·rel_tol"
    ))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 9] = [
        ("thermal identity", thermal_identity),
        ("fixed-point structure", fixed_point_structure),
        ("Lyapunov consistency", lyapunov_consistency),
        ("saturation entropy reproduction", saturation_reproduction),
        ("dissipative proportionality", dissipative_proportionality),
        ("saturation-delay law", saturation_delay),
        ("scaling collapse", scaling_collapse),
        ("cross-module oracle", cross_module_oracle),
        ("determinism and refinement", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {}. {name}: {detail} ({elapsed:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {}. {name}: {detail} ({elapsed:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
