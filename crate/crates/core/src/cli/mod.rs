//! Command-line front end: `run`, `sweep` and `presets`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::domain::{plan_count, preset, PRESET_NAMES};
use crate::harness::{fnv1a, run_experiment, ExperimentResult, HarnessError};
use crate::metrics::build_frontier;

pub use config::{parse_lambda_grid, ConfigError, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Overrides `base_seed` when set.
pub const SEED_ENV_VAR: &str = "PARETO_BANDIT_SEED";

#[derive(Debug, Parser)]
#[command(name = "pareto-bandit", version, about = "Budgeted combinatorial bandit experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every (agent, λ, trial) cell and write summary.csv and frontier.csv.
    Run {
        config: PathBuf,
        /// Worker threads; defaults to the number of available cores.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory; overrides `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write traces/<agent>_<lambda>_<trial>.csv.
        #[arg(long)]
        emit_traces: bool,
    },
    /// Run with a replacement λ grid and write frontier.csv.
    Sweep {
        config: PathBuf,
        /// Comma-separated λ values in [0, 1].
        #[arg(long, value_name = "a,b,c")]
        lambda_grid: String,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in action spaces.
    Presets,
}

/// Command-line adjustments applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub emit_traces: bool,
    pub lambda_grid: Option<Vec<f64>>,
    pub base_seed: Option<u64>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn report(self) -> i32 {
        match self {
            Failure::Config(m) => {
                eprintln!("config error: {m}");
                EXIT_CONFIG
            }
            Failure::Runtime(m) => {
                eprintln!("error: {m}");
                EXIT_RUNTIME
            }
        }
    }
}

fn io_fail(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn seed_from_env() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Config(format!("{SEED_ENV_VAR}={v:?} is not an unsigned 64-bit integer"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::Config(format!("{SEED_ENV_VAR}: {e}"))),
    }
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Loads the config, applies overrides and runs the experiment.
fn execute(config_path: &Path, ov: &Overrides) -> Result<(RunConfig, PathBuf, ExperimentResult), Failure> {
    let mut cfg = RunConfig::load(config_path).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(grid) = &ov.lambda_grid {
        cfg.set_lambda_grid(grid.clone()).map_err(Failure::Config)?;
    }
    if let Some(seed) = ov.base_seed {
        cfg.base_seed = seed;
    }
    if ov.emit_traces {
        cfg.emit_traces = true;
    }
    let jobs = ov.jobs.unwrap_or_else(default_jobs);
    if jobs == 0 {
        return Err(Failure::Config("--jobs must be ≥ 1".into()));
    }
    let out = ov.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let result = run_experiment(&cfg.plan(), jobs).map_err(|e| match e {
        HarnessError::Plan(e) => Failure::Config(e.to_string()),
        other => Failure::Runtime(other.to_string()),
    })?;
    std::fs::create_dir_all(&out).map_err(io_fail(&out))?;
    Ok((cfg, out, result))
}

fn write_common(cfg: &RunConfig, out: &Path, result: &ExperimentResult) -> Result<(), Failure> {
    let records = result.records();
    let frontier = build_frontier(&records, &cfg.lambda_grid).map_err(|e| Failure::Runtime(e.to_string()))?;
    let path = out.join("frontier.csv");
    output::write_frontier(&path, &frontier).map_err(io_fail(&path))?;

    let text = toml::to_string(cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
    let meta = output::MetadataFile::new(fnv1a(text.into_bytes()), &result.meta, result.cells.len());
    let path = out.join("metadata.toml");
    output::write_metadata(&path, &meta).map_err(io_fail(&path))
}

fn run_impl(config_path: &Path, ov: &Overrides) -> Result<(), Failure> {
    let (cfg, out, result) = execute(config_path, ov)?;
    let path = out.join("summary.csv");
    output::write_summary(&path, &result.records()).map_err(io_fail(&path))?;
    write_common(&cfg, &out, &result)?;
    if cfg.emit_traces {
        output::write_traces(&out, &result).map_err(io_fail(&out))?;
    }
    println!(
        "{} cells in {:.2}s -> {}",
        result.cells.len(),
        result.meta.wall_time.as_secs_f64(),
        out.display()
    );
    Ok(())
}

fn sweep_impl(config_path: &Path, ov: &Overrides) -> Result<(), Failure> {
    let (cfg, out, result) = execute(config_path, ov)?;
    write_common(&cfg, &out, &result)?;
    println!("{} cells -> {}", result.cells.len(), out.join("frontier.csv").display());
    Ok(())
}

/// `run <config>`: writes summary.csv, frontier.csv, metadata.toml and
/// optionally per-cell traces.
pub fn cmd_run(config_path: &Path, overrides: &Overrides) -> i32 {
    match run_impl(config_path, overrides) {
        Ok(()) => EXIT_OK,
        Err(f) => f.report(),
    }
}

/// `sweep <config> --lambda-grid a,b,c`: writes frontier.csv and metadata.toml.
pub fn cmd_sweep(config_path: &Path, overrides: &Overrides) -> i32 {
    if overrides.lambda_grid.is_none() {
        return Failure::Config("sweep needs --lambda-grid".into()).report();
    }
    match sweep_impl(config_path, overrides) {
        Ok(()) => EXIT_OK,
        Err(f) => f.report(),
    }
}

/// Prints every preset with its dimensions and level counts.
pub fn cmd_presets(out: &mut dyn Write) -> i32 {
    for name in PRESET_NAMES {
        let space = preset(name).expect("listed preset exists");
        let plans = plan_count(&space).map_or_else(|_| "overflow".to_string(), |n| n.to_string());
        let _ = writeln!(out, "{name}: {} dimensions, {plans} plans", space.dims());
        for k in 0..space.dims() {
            let _ = writeln!(out, "  {:<8} {} levels", space.label(k), space.arms(k));
        }
    }
    EXIT_OK
}

/// Parses `args` (including the program name) and dispatches.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let base_seed = match &cli.command {
        Command::Presets => None,
        _ => match seed_from_env() {
            Ok(s) => s,
            Err(f) => return f.report(),
        },
    };
    match cli.command {
        Command::Run { config, jobs, out, emit_traces } => cmd_run(
            &config,
            &Overrides { jobs, out, emit_traces, lambda_grid: None, base_seed },
        ),
        Command::Sweep { config, lambda_grid, jobs, out } => {
            let grid = match parse_lambda_grid(&lambda_grid) {
                Ok(g) => g,
                Err(m) => return Failure::Config(format!("--lambda-grid: {m}")).report(),
            };
            cmd_sweep(
                &config,
                &Overrides { jobs, out, emit_traces: false, lambda_grid: Some(grid), base_seed },
            )
        }
        Command::Presets => cmd_presets(&mut std::io::stdout().lock()),
    }
}
