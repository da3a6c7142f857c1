//! Command-line front end: simulate single trajectories, sweep the phase
//! diagram, inspect fixed points, run the scaling collapse, self-check.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use entropy_kinetics::analytics::{classify, collapse, fixed_points};
use entropy_kinetics::config::RunConfig;
use entropy_kinetics::kinetics::{integrate, EffectiveCouplings, IntegratorControls};
use entropy_kinetics::sweep::{default_t_max, run_sweep, sweep_manifest, sweep_to_table};
use entropy_kinetics::thermo::thermal_point;
use entropy_kinetics::{fmt_f64, selfcheck, Error};

#[derive(Parser)]
#[command(name = "entropy-kinetics", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output data file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write `time,f3,entropy`.
    Simulate(Io),
    /// Run a grid over Vt/Jt and Kt/Jt and write the plateau table.
    Sweep {
        #[command(flatten)]
        io: Io,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the fixed points of the reduced flow.
    FixedPoints {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Vt/Jt, overrides the config.
        #[arg(long)]
        r: Option<f64>,
        /// Detuning, overrides the config.
        #[arg(long)]
        x: Option<f64>,
    },
    /// Scaling collapse of entropy curves over a list of Kt/Jt.
    Collapse(Io),
    /// Run the embedded invariant suite.
    Selfcheck,
}

enum Failure {
    SelfCheck(Vec<String>),
    Config(anyhow::Error),
    Integration(anyhow::Error),
    PartialSweep(usize),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::SelfCheck(_) => 1,
            Self::Config(_) => 2,
            Self::Integration(_) => 3,
            Self::PartialSweep(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::IntegrationFailure { .. } | Error::BlowUp { .. } => {
                Failure::Integration(e.into())
            }
            other => Failure::Config(other.into()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    Ok(RunConfig::from_path(path)?)
}

/// Output location must be writable: its directory has to exist.
fn check_out(path: &Path) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !dir.is_dir() {
        return Err(config_err(anyhow!(
            "output directory {} does not exist",
            dir.display()
        )));
    }
    Ok(())
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Config)
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.toml");
    PathBuf::from(name)
}

fn simulate(io: &Io) -> Outcome {
    let cfg = load(&io.config)?;
    check_out(&io.out)?;
    let sim = cfg
        .simulate
        .ok_or_else(|| config_err(anyhow!("config has no [simulate] table")))?;
    let thermal = sim.thermal()?;
    let couplings = sim.couplings()?;
    let controls = sim.controls()?;
    if couplings.probe_limit_warning() {
        eprintln!("warning: Kt is not small compared to Jt + Vt; closed forms assume a weak probe");
    }
    let report = classify(&couplings, &thermal);
    let traj = integrate(&couplings, &thermal, &controls, sim.f3_init)?;
    write(&io.out, &traj.to_csv())?;

    let manifest = format!(
        "command = \"simulate\"\naccepted_steps = {}\nrejected_steps = {}\nplateau = {}\n\n{}",
        traj.accepted_steps,
        traj.rejected_steps,
        traj.plateau.map(|p| fmt_f64(p.value)).unwrap_or_else(|| "nan".into()),
        RunConfig { simulate: Some(sim), ..Default::default() }.to_toml(),
    );
    write(&manifest_path(&io.out), &manifest)?;

    println!("phase:      {}", report.phase);
    println!("lyapunov:   {:.6e}", report.lyapunov);
    println!("analytic:   {:.6e}", report.saturation);
    match traj.plateau {
        Some(p) => println!("plateau:    {:.6e} (settled by t = {:.6e})", p.value, p.time),
        None => println!("plateau:    not reached (final {:.6e})", traj.final_entropy()),
    }
    Ok(())
}

fn sweep(io: &Io, jobs: usize) -> Outcome {
    let cfg = load(&io.config)?;
    check_out(&io.out)?;
    let section = cfg
        .sweep
        .ok_or_else(|| config_err(anyhow!("config has no [sweep] table")))?;
    let sweep_cfg = section.sweep_config()?;
    if jobs == 0 {
        return Err(config_err(anyhow!("--jobs must be at least 1")));
    }
    let outcome = run_sweep(&sweep_cfg, jobs)?;
    write(&io.out, &sweep_to_table(&outcome.rows))?;
    write(&manifest_path(&io.out), &sweep_manifest(&sweep_cfg, &outcome))?;
    println!(
        "{} cells, {} failed",
        outcome.rows.len(),
        outcome.failures
    );
    for row in outcome.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("r = {:.6}, k = {:.6e}: {}", row.r, row.k, row.error.as_deref().unwrap());
    }
    if outcome.failures > 0 {
        return Err(Failure::PartialSweep(outcome.failures));
    }
    Ok(())
}

fn fixed_points_cmd(config: Option<&Path>, r: Option<f64>, x: Option<f64>) -> Outcome {
    let section = match config {
        Some(path) => load(path)?.fixed_points,
        None => None,
    };
    let r = r
        .or(section.as_ref().map(|s| s.r))
        .ok_or_else(|| config_err(anyhow!("Vt/Jt not given (--r or [fixed-points] r)")))?;
    let x = x.or(section.as_ref().map(|s| s.x)).unwrap_or(0.0);
    let jt = section.as_ref().map(|s| s.jt).unwrap_or(1.0);
    let thermal = thermal_point(x)?;
    let couplings = EffectiveCouplings::from_ratios(jt, r, 0.0)?;
    let report = classify(&couplings, &thermal);
    let set = fixed_points(&couplings, &thermal);

    println!("r = {r:.6}, x = {x:.6}, w2b = {:.6}, n2b = {:.6}", thermal.w2b(), thermal.n2b());
    println!("phase: {}", report.phase);
    println!("{:>14} {:>14} {:>14} {:>10} {:>4}", "c", "f3", "slope", "stability", "mult");
    for p in &set.roots {
        println!(
            "{:>14.6} {:>14.6} {:>14.6e} {:>10} {:>4}",
            p.c, p.f3, p.slope, p.stability, p.multiplicity
        );
    }
    println!("lyapunov: {:.6e}", report.lyapunov);
    println!("saturation entropy: {:.6e}", report.saturation);
    Ok(())
}

fn collapse_cmd(io: &Io) -> Outcome {
    let cfg = load(&io.config)?;
    check_out(&io.out)?;
    let section = cfg
        .collapse
        .ok_or_else(|| config_err(anyhow!("config has no [collapse] table")))?;
    let thermal = thermal_point(section.x)?;
    let base = EffectiveCouplings::from_ratios(section.jt, section.r, 0.0)?;
    let mut trajectories = Vec::with_capacity(section.k_list.len());
    for &k in &section.k_list {
        let couplings = EffectiveCouplings::from_ratios(section.jt, section.r, k)?;
        let fallback = default_t_max(&couplings, &thermal);
        let controls: IntegratorControls = section.integrator.controls(fallback)?;
        trajectories.push(integrate(&couplings, &thermal, &controls, None)?);
    }
    let col = collapse(&trajectories, &base, &thermal)?;

    let mut csv = String::from("x");
    for c in &col.curves {
        csv.push_str(&format!(",g_k{}", fmt_f64(c.probe_ratio)));
    }
    csv.push('\n');
    for (i, x) in col.grid.iter().enumerate() {
        csv.push_str(&fmt_f64(*x));
        for c in &col.curves {
            csv.push(',');
            csv.push_str(&fmt_f64(c.g[i]));
        }
        csv.push('\n');
    }
    write(&io.out, &csv)?;
    println!("collapse score: {:.6e}", col.score);
    for c in &col.curves {
        println!("k = {:.6e}: monotone = {}", c.probe_ratio, c.monotone);
    }
    Ok(())
}

fn selfcheck_cmd() -> Outcome {
    let report = selfcheck::run(&selfcheck::Reference::default());
    for o in &report.outcomes {
        match &o.result {
            Ok(()) => println!("ok    {}", o.name),
            Err(msg) => println!("FAIL  {}: {msg}", o.name),
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::SelfCheck(report.failed().map(|o| o.name.to_string()).collect()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(io) => simulate(io),
        Command::Sweep { io, jobs } => sweep(io, *jobs),
        Command::FixedPoints { config, r, x } => fixed_points_cmd(config.as_deref(), *r, *x),
        Command::Collapse(io) => collapse_cmd(io),
        Command::Selfcheck => selfcheck_cmd(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::SelfCheck(names) => eprintln!("self-check failed: {}", names.join(", ")),
                Failure::Config(e) => eprintln!("error: {e:#}"),
                Failure::Integration(e) => eprintln!("integration error: {e:#}"),
                Failure::PartialSweep(n) => eprintln!("{n} sweep cell(s) failed"),
            }
            ExitCode::from(failure.code())
        }
    }
}
