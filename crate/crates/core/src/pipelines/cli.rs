//! `simgen` command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use super::{run_augmentation, run_data_needs, ExperimentConfig, ExperimentKind, PipelineError};
use crate::datagen::{generate, write_csv, DatagenError, GenerationConfig};
use crate::models::ModelRegistry;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "simgen", version, about = "Simulate ODE-based time series and run ML benchmarks on them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a dataset from a generation config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replaces the config's master_seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run an experiment config.
    Experiment {
        #[command(subcommand)]
        which: ExperimentCommand,
    },
    /// Check a generation or experiment config without running it.
    ValidateConfig { file: PathBuf },
}

#[derive(Debug, Subcommand)]
enum ExperimentCommand {
    /// Model accuracy as a function of synthetic dataset size.
    DataNeeds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Forecasting with and without synthetic augmentation.
    Augment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Failure of a command with the exit code it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(message: impl ToString) -> Self {
        Self { code: EXIT_CONFIG, message: message.to_string() }
    }

    fn runtime(message: impl ToString) -> Self {
        Self { code: EXIT_RUNTIME, message: message.to_string() }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_config_error() {
            Failure::config(e)
        } else {
            Failure::runtime(e)
        }
    }
}

/// Run with process arguments and standard streams.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run(args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Parse `args` (including the program name), execute, and return the exit
/// code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_CONFIG
                }
            };
        }
    };
    if let Err(message) = configure_threads() {
        let _ = writeln!(err, "error: {message}");
        return EXIT_CONFIG;
    }
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Size the global worker pool from `SIMGEN_THREADS`, if set.
fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("SIMGEN_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("SIMGEN_THREADS must be a positive integer, got `{value}`"))?;
    // a pool may already exist when called repeatedly in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Generate { config, out: dir, seed } => {
            let mut cfg = load_generation(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            cfg.validate(&ModelRegistry::with_builtins()).map_err(Failure::config)?;
            let dataset = generate(&cfg).map_err(Failure::runtime)?;
            write_csv(&dataset, &dir).map_err(Failure::runtime)?;
            let _ = writeln!(out, "wrote {} series to {}", dataset.series.len(), dir.display());
        }
        Command::Experiment { which } => {
            let (path, seed, kind) = match which {
                ExperimentCommand::DataNeeds { config, seed } => (config, seed, ExperimentKind::DataNeeds),
                ExperimentCommand::Augment { config, seed } => (config, seed, ExperimentKind::Augmentation),
            };
            let mut cfg = ExperimentConfig::load(&path).map_err(Failure::config)?;
            if cfg.kind != kind {
                return Err(Failure::config(format!("{} is a {:?} experiment", path.display(), cfg.kind)));
            }
            if let Some(s) = seed {
                cfg.override_seed(s);
            }
            let rows = match kind {
                ExperimentKind::DataNeeds => run_data_needs(&cfg)?.len(),
                ExperimentKind::Augmentation => run_augmentation(&cfg)?.report.len(),
            };
            let _ = writeln!(out, "wrote {rows} report rows to {}", cfg.output_dir.join("report.csv").display());
        }
        Command::ValidateConfig { file } => {
            let text = read(&file)?;
            let value: serde_json::Value = serde_json::from_str(&text).map_err(Failure::config)?;
            if value.get("schema").is_some() {
                let cfg = ExperimentConfig::from_json(&text).map_err(Failure::config)?;
                cfg.validate().map_err(Failure::config)?;
                let _ = writeln!(out, "ok: {:?} experiment `{}`", cfg.kind, cfg.id);
            } else {
                let cfg = GenerationConfig::from_json(&text).map_err(Failure::config)?;
                cfg.validate(&ModelRegistry::with_builtins()).map_err(Failure::config)?;
                let _ = writeln!(out, "ok: generation config for `{}`", cfg.system);
            }
        }
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn load_generation(path: &Path) -> Result<GenerationConfig, Failure> {
    GenerationConfig::from_json(&read(path)?).map_err(|e: DatagenError| Failure::config(format!("{}: {e}", path.display())))
}
