//! `clbc`: run scenarios, sweep damping gains, run self-checks.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use clbc::baselines::ControllerKind;
use clbc::experiments::{builtin, builtin_case3, parse_range, run_checks, run_scenario, ScenarioSpec, Trace};
use clbc::plant::DisturbanceSpec;
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "clbc", version, about = "Composite learning backstepping control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write trace.csv, summary.csv and scenario.cfg.
    Run(RunArgs),
    /// Run a scenario for every damping gain in a range and every controller.
    Sweep(SweepArgs),
    /// Quick self-checks of the closed loop.
    Check,
}

#[derive(Args)]
struct RunArgs {
    /// case1, case2, case3 or file:<path>
    #[arg(long)]
    scenario: String,
    /// clbc, eps-only or xi-only (defaults to the scenario's controller)
    #[arg(long)]
    controller: Option<ControllerKind>,
    /// Nonlinear damping gain applied to every stage.
    #[arg(long)]
    kd: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Integration step in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated time in seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    noise_std: Option<f64>,
    /// none, const:<bound>:<channel>, sin:<bound>:<freq>:<channel> or rand:<bound>:<hold>:<seed>
    #[arg(long)]
    disturbance: Option<DisturbanceSpec>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "case3")]
    scenario: String,
    /// start:step:end
    #[arg(long, default_value = "0.01:0.03:0.19")]
    kd_list: String,
    /// Comma-separated controllers.
    #[arg(long, value_delimiter = ',', default_value = "clbc,eps-only,xi-only")]
    controllers: Vec<ControllerKind>,
    #[arg(long)]
    out: PathBuf,
}

fn load_scenario(name: &str, kd: Option<f64>) -> Result<ScenarioSpec> {
    if let Some(path) = name.strip_prefix("file:") {
        let text = fs::read_to_string(path).with_context(|| format!("reading scenario file {path}"))?;
        let mut spec = ScenarioSpec::from_config(&text).with_context(|| format!("parsing {path}"))?;
        if let Some(kd) = kd {
            spec.kd = vec![kd; spec.kd.len()];
        }
        return Ok(spec);
    }
    Ok(match (name, kd) {
        ("case3", Some(kd)) => builtin_case3(kd)?,
        (_, kd) => {
            let mut spec = builtin(name)?;
            if let Some(kd) = kd {
                spec.kd = vec![kd; spec.kd.len()];
            }
            spec
        }
    })
}

fn apply_overrides(spec: &mut ScenarioSpec, args: &RunArgs) {
    if let Some(c) = args.controller {
        spec.controller = c;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    if let Some(v) = args.dt {
        spec.dt = v;
    }
    if let Some(v) = args.duration {
        spec.duration = v;
    }
    if let Some(v) = args.noise_std {
        spec.noise_std = v;
    }
    if let Some(d) = &args.disturbance {
        spec.disturbance = d.clone();
    }
}

/// Runs `spec` and writes its files into `dir`. A diverged run still writes
/// the partial trace before the error is returned.
fn run_into(spec: &ScenarioSpec, dir: &Path) -> Result<clbc::experiments::MetricsRecord> {
    spec.validate()?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("scenario.cfg"), spec.to_config())?;
    match run_scenario(spec) {
        Ok((trace, metrics)) => {
            trace.write_csv(dir.join("trace.csv"))?;
            fs::write(dir.join("summary.csv"), metrics.to_csv())?;
            Ok(metrics)
        }
        Err(clbc::Error::Diverged {
            last_valid_time,
            reason,
            partial,
        }) => {
            Trace::write_csv(&partial, dir.join("trace.csv"))?;
            bail!("diverged after t = {last_valid_time}: {reason}")
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let mut spec = load_scenario(&args.scenario, args.kd)?;
    apply_overrides(&mut spec, args);
    let metrics = run_into(&spec, &args.out)?;
    print!("{}", metrics.to_csv());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let gains = parse_range(&args.kd_list)?;
    let jobs: Vec<(ControllerKind, f64)> = args
        .controllers
        .iter()
        .flat_map(|c| gains.iter().map(move |kd| (*c, *kd)))
        .collect();
    let results: Vec<(ControllerKind, f64, Result<clbc::experiments::MetricsRecord>)> = jobs
        .par_iter()
        .map(|&(controller, kd)| {
            let res = load_scenario(&args.scenario, Some(kd)).and_then(|mut spec| {
                spec.controller = controller;
                run_into(&spec, &args.out.join(format!("{controller}_kd{kd}")))
            });
            (controller, kd, res)
        })
        .collect();
    let mut table = String::from("controller,kd,status,peak_abs_e1,tail_rms_e1,time_to_threshold,stage_count\n");
    for (controller, kd, res) in &results {
        match res {
            Ok(m) => {
                let time = m.time_to_threshold.map_or("none".to_string(), |t| t.to_string());
                let _ = writeln!(
                    table,
                    "{controller},{kd},ok,{},{},{time},{}",
                    m.peak_abs_e1, m.tail_rms_e1, m.stage_count
                );
            }
            Err(e) => {
                log::warn!("{controller} kd={kd}: {e:#}");
                let _ = writeln!(table, "{controller},{kd},diverged,inf,inf,none,0");
            }
        }
    }
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("sweep.csv"), &table)?;
    print!("{table}");
    Ok(())
}

fn cmd_check() -> bool {
    let outcomes = run_checks();
    for c in &outcomes {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    outcomes.iter().all(|c| c.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Check => {
            return if cmd_check() { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
