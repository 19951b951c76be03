//! Command-line front end: `analyze`, `simulate`, `sweep` and `trace`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration
//! error, 3 network-size guard refusal, 4 trace ingestion error.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use epibroadcast::Error;

use crate::config::{RawConfig, KEYS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;
pub const EXIT_INGESTION: i32 = 4;

/// Environment variable fixing the worker-thread count.
pub const THREADS_ENV: &str = "EPIBROADCAST_THREADS";

#[derive(Debug, Parser)]
#[command(name = "epibroadcast", version, about = "Epidemic broadcast bounds and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the closed-form bounds for one parameter set.
    Analyze(Common),
    /// Simulate one parameter set and report it next to its bounds.
    Simulate(Common),
    /// Simulate every value of `sweep.axis` over `sweep.values`.
    Sweep(Common),
    /// Broadcast over recorded GPS traces.
    Trace(Common),
    /// List configuration keys and their defaults.
    Keys,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one key (repeatable), e.g. `--set channel.sigma=4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Replications per parameter point (`run.count`).
    #[arg(long)]
    runs: Option<u64>,
    /// Master seed (`run.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (`output.path`); stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Output format (`output.format`).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Common {
    fn raw(&self) -> epibroadcast::Result<RawConfig> {
        let mut raw = match &self.config {
            Some(p) => RawConfig::load(p)?,
            None => RawConfig::default(),
        };
        for pair in &self.set {
            raw.set_pair(pair)?;
        }
        if let Some(r) = self.runs {
            raw.set("run.count", &r.to_string());
        }
        if let Some(s) = self.seed {
            raw.set("run.seed", &s.to_string());
        }
        if let Some(o) = &self.out {
            raw.set("output.path", &o.to_string_lossy());
        }
        if let Some(f) = self.format {
            raw.set("output.format", if matches!(f, Format::Json) { "json" } else { "csv" });
        }
        Ok(raw)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidInput(_) => EXIT_USAGE,
        Error::Guard(_) => EXIT_GUARD,
        Error::Ingestion(_) => EXIT_INGESTION,
        _ => EXIT_FAILURE,
    }
}

fn init_threads() -> epibroadcast::Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // A second initialisation in the same process is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(common: &Common, cmd: fn(&RawConfig) -> epibroadcast::Result<(commands::Outcome, config::ExperimentConfig)>) -> epibroadcast::Result<()> {
    init_threads()?;
    let raw = common.raw()?;
    let (outcome, cfg) = cmd(&raw)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    outcome.write(cfg.format, cfg.output_path.as_deref())
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Analyze(c) => execute(c, commands::analyze_cmd),
        Command::Simulate(c) => execute(c, commands::simulate_cmd),
        Command::Sweep(c) => execute(c, commands::sweep_cmd),
        Command::Trace(c) => execute(c, commands::trace_cmd),
        Command::Keys => {
            for (k, d) in KEYS {
                println!("{k} = {d}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
