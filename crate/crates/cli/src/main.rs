//! becsync: experiment runner over the two-mode condensate models.
//!
//! Every run reads a flat `key = value` config, writes one CSV of results
//! and one JSON sidecar echoing the fully-resolved config, and exits 0.
//! Config problems exit 1; physics/runtime failures exit 2.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

mod config;
mod experiments;
mod output;
mod sweep;

use config::{ConfigError, RawConfig};
use output::{write_outputs, RunOutput, SweepMeta};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

#[derive(Parser)]
#[command(
    name = "becsync",
    version,
    about = "Two-mode condensate dynamics, spectra, and synchronization measures"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file
    #[arg(long)]
    config: PathBuf,
    /// Override a config key (repeatable; overrides beat the file)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Sweep axis `name=start:stop:step` (one or two)
    #[arg(long = "axis", value_name = "NAME=START:STOP:STEP")]
    axis: Vec<String>,
    /// Metric recorded at every grid point
    #[arg(long)]
    metric: String,
    /// Worker threads for the grid
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classical trajectory with imbalance, phase, and invariants
    MeanfieldRun(RunArgs),
    /// Orbit family in the (r_minus, phi_minus) plane
    PhasePortrait(RunArgs),
    /// Covering areas and trajectory distance across a chi scan
    MsScan(RunArgs),
    /// Steady-state r_minus oscillation amplitude over a (delta, chi) grid
    AmplitudeMap(RunArgs),
    /// Fixed-N eigenvalues across a chi scan
    Spectrum(RunArgs),
    /// Number-state evolution in one fixed-N sector
    FockEvolve(RunArgs),
    /// Truncated coherent-state evolution over the full space
    CoherentEvolve(RunArgs),
    /// Husimi distribution of one mode at one time
    QSnapshot(RunArgs),
    /// Synchronization measure and mutual information over time
    Measures(RunArgs),
    /// Scalar metric over a one- or two-axis parameter grid
    Sweep(SweepArgs),
    /// Check a config against its experiment schema without running
    Validate { file: PathBuf },
}

fn read_config_file(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    Ok(RawConfig::parse(&text)?)
}

fn load_config(args: &RunArgs) -> Result<RawConfig, CliError> {
    let mut raw = read_config_file(&args.config)?;
    for spec in &args.set {
        raw.apply_set(spec)?;
    }
    Ok(raw)
}

fn finish_outputs(
    out: &RunOutput,
    experiment: &str,
    start: Instant,
    sweep: Option<&SweepMeta>,
) -> Result<(), CliError> {
    let elapsed = start.elapsed().as_secs_f64();
    let (csv_path, json_path) = write_outputs(out, experiment, elapsed, sweep)?;
    println!("wrote {csv_path} ({} rows) and {json_path}", out.rows.len());
    Ok(())
}

fn run_experiment(name: &str, args: &RunArgs) -> Result<(), CliError> {
    let raw = load_config(args)?;
    let start = Instant::now();
    let out = experiments::run(name, &raw, true)?;
    finish_outputs(&out, name, start, None)
}

fn run_sweep_cmd(args: &SweepArgs) -> Result<(), CliError> {
    if args.axis.is_empty() || args.axis.len() > 2 {
        return Err(ConfigError::Value {
            key: "axis".into(),
            msg: "need one or two --axis flags".into(),
        }
        .into());
    }
    let axes = args
        .axis
        .iter()
        .map(|s| sweep::parse_axis(s))
        .collect::<Result<Vec<_>, _>>()?;
    let raw = load_config(&args.run)?;
    let start = Instant::now();
    let (out, meta) = sweep::run_sweep(&raw, &axes, &args.metric, args.workers, true)?;
    finish_outputs(&out, "sweep", start, Some(&meta))
}

fn validate(file: &Path) -> Result<(), CliError> {
    let raw = read_config_file(file)?;
    let Some((experiment, _)) = raw.get("experiment").cloned() else {
        return Err(ConfigError::Missing { key: "experiment".into() }.into());
    };
    let out = if experiment == "sweep" {
        sweep::validate_base(&raw)?
    } else {
        experiments::run(&experiment, &raw, false)?
    };
    println!("ok: {experiment}");
    for (key, value) in &out.echo {
        println!("  {key} = {value}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::MeanfieldRun(a) => run_experiment("meanfield-run", a),
        Cmd::PhasePortrait(a) => run_experiment("phase-portrait", a),
        Cmd::MsScan(a) => run_experiment("ms-scan", a),
        Cmd::AmplitudeMap(a) => run_experiment("amplitude-map", a),
        Cmd::Spectrum(a) => run_experiment("spectrum", a),
        Cmd::FockEvolve(a) => run_experiment("fock-evolve", a),
        Cmd::CoherentEvolve(a) => run_experiment("coherent-evolve", a),
        Cmd::QSnapshot(a) => run_experiment("q-snapshot", a),
        Cmd::Measures(a) => run_experiment("measures", a),
        Cmd::Sweep(a) => run_sweep_cmd(a),
        Cmd::Validate { file } => validate(file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
