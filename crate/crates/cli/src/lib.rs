//! Command-line frontend for the qlink link model.
//!
//! Exit codes: 0 success (also when the key rate is zero everywhere),
//! 2 configuration error, 3 runtime error.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{parse_assignment, parse_lines, RunConfig};
use crate::output::write_table;

pub const THREADS_ENV: &str = "QLINK_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qlink", version, about = "Rates, key and link budgets of wavelength-multiplexed entangled-photon QKD links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Named scenario to start from.
    #[arg(long, global = true, default_value = "lab")]
    pub preset: String,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// File of `section.key = value` lines applied before `--set`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Monte Carlo seed (mc.seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo duration in seconds (mc.duration_s).
    #[arg(long, global = true)]
    pub duration: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Per-pair and total rates and key at a single operating point.
    Rates,
    /// One- or two-axis parameter sweep.
    Sweep,
    /// Grid search over pump power and coincidence window.
    Optimize,
    /// Key rate against dual-link attenuation.
    Linkbudget,
    /// Monte Carlo time-tag simulation compared against the analytic rates.
    Mc,
    /// Channel plan layout.
    Plan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rates => "rates",
            Command::Sweep => "sweep",
            Command::Optimize => "optimize",
            Command::Linkbudget => "linkbudget",
            Command::Mc => "mc",
            Command::Plan => "plan",
        }
    }
}

/// Preset, then config file, then `--set`, then the dedicated flags.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::new(&cli.preset)?;
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for (k, v) in parse_lines(&text)? {
            cfg.set(&k, &v)?;
        }
    }
    for s in &cli.set {
        let (k, v) = parse_assignment(s)?;
        cfg.set(&k, &v)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("mc.seed", &seed.to_string())?;
    }
    if let Some(d) = cli.duration {
        cfg.set("mc.duration_s", &d.to_string())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV}: `{raw}` must be a positive integer")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = resolve(cli)?;
    if let (Some(out), Some(input)) = (&cli.out, &cli.config) {
        if out == input {
            return Err(CliError::Config("--out must not overwrite the --config file".to_string()));
        }
    }
    cfg.log_defaults();
    let mut outcome = match cli.command {
        Command::Rates => commands::rates(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Optimize => commands::optimize_cmd(&cfg),
        Command::Linkbudget => commands::linkbudget(&cfg),
        Command::Mc => commands::mc(&cfg),
        Command::Plan => commands::plan(&cfg),
    }?;
    if outcome.zero_rate {
        log::warn!("secure key rate is zero at every evaluated point");
        outcome.table.note("zero-rate: secure key rate is 0 at every evaluated point");
    }
    let name = cli.command.name();
    let written = match &cli.out {
        Some(path) => File::create(path).and_then(|f| write_table(io::BufWriter::new(f), &cfg, name, &outcome.table)),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_table(&mut lock, &cfg, name, &outcome.table).and_then(|_| lock.flush())
        }
    };
    written.map_err(|e| CliError::Runtime(format!("writing output: {e}")))
}

/// Parses `args`, runs, and maps the result to a process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            eprintln!("qlink: {e}");
            e.exit_code()
        }
    }
}
