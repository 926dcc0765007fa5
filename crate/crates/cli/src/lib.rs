//! Command-line driver for the `onebit-rip` experiments.
//!
//! Each subcommand reads a JSON config, writes a CSV table to `--out` and a
//! manifest next to it (`<out>.manifest.json`), and exits with 0 when every
//! declared check passes, 1 when a check fails and 2 on configuration or
//! I/O errors.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::commands::Run;
use crate::config::{EmbedMcConfig, MetricTableConfig, NoisyFloorConfig, RipSweepConfig, VcConfig};
use crate::output::{codes_path, manifest_path, unix_now, write_atomic, RunManifest, MANIFEST_VERSION};

pub const THREADS_ENV: &str = "ONEBIT_RIP_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<onebit_rip::Error> for CliError {
    fn from(e: onebit_rip::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "onebit-rip", version, about = "Monte-Carlo checks for one-bit Gaussian embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config for the subcommand (a run manifest is also accepted).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// CSV output path; the manifest goes to `<out>.manifest.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads. Changes speed only, never output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write every code to `<out>.codes.bin` (embed-mc only).
    #[arg(long, global = true)]
    pub dump_codes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Closed-form distances over a grid of correlations and noise levels.
    MetricTable,
    /// Hamming distance of one correlated pair against its predicted value.
    EmbedMc,
    /// Deviation-versus-m sweep with a log-log slope check.
    RipSweep,
    /// Geodesic floor versus distorted-metric decay under noise.
    NoisyFloor,
    /// Shattering checks, VC lower-bound search, Lambert grid, packing.
    Vc,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::MetricTable => "metric-table",
            Command::EmbedMc => "embed-mc",
            Command::RipSweep => "rip-sweep",
            Command::NoisyFloor => "noisy-floor",
            Command::Vc => "vc",
        }
    }
}

/// Result of a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    CheckFailed,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Passed => 0,
            Outcome::CheckFailed => 1,
        }
    }
}

trait Experiment: Serialize + DeserializeOwned + Default {
    fn seed_mut(&mut self) -> &mut u64;
    fn out_mut(&mut self) -> &mut Option<PathBuf>;
    fn execute(&self, dump_codes: bool) -> Result<Run, CliError>;
}

macro_rules! experiment {
    ($ty:ty, |$cfg:ident, $dump:ident| $body:expr) => {
        impl Experiment for $ty {
            fn seed_mut(&mut self) -> &mut u64 {
                &mut self.seed
            }
            fn out_mut(&mut self) -> &mut Option<PathBuf> {
                &mut self.out
            }
            fn execute(&self, $dump: bool) -> Result<Run, CliError> {
                let $cfg = self;
                $body
            }
        }
    };
}

experiment!(MetricTableConfig, |c, _d| commands::metric_table(c));
experiment!(EmbedMcConfig, |c, d| commands::embed_mc(c, d));
experiment!(RipSweepConfig, |c, _d| commands::rip_sweep(c));
experiment!(NoisyFloorConfig, |c, _d| commands::noisy_floor(c));
experiment!(VcConfig, |c, _d| commands::vc(c));

/// Reads a config file, unwrapping a manifest's embedded config if given one.
fn load_config<T: Experiment>(cli: &Cli) -> Result<T, CliError> {
    let Some(path) = &cli.config else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)?;
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if value.get("manifest_version").is_some() {
        let sub = value.get("subcommand").and_then(Value::as_str).unwrap_or_default();
        if sub != cli.command.name() {
            return Err(CliError::Config(format!(
                "manifest was written by `{sub}`, not `{}`",
                cli.command.name()
            )));
        }
        value = value
            .get_mut("config")
            .map(Value::take)
            .ok_or_else(|| CliError::Config("manifest has no config".into()))?;
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn thread_count(cli: &Cli) -> Result<Option<usize>, CliError> {
    let raw = match cli.threads {
        Some(k) => Some(k),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Config(format!("{THREADS_ENV}={v:?} is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if raw == Some(0) {
        return Err(CliError::Config("thread count must be at least 1".into()));
    }
    Ok(raw)
}

#[cfg(feature = "parallel")]
fn configure_threads(k: usize) {
    // A second call in the same process keeps the first pool; output does not
    // depend on the pool size, so that is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_k: usize) {}

fn run_experiment<T: Experiment>(cli: &Cli) -> Result<Outcome, CliError> {
    let mut cfg: T = load_config(cli)?;
    if let Some(seed) = cli.seed {
        *cfg.seed_mut() = seed;
    }
    if let Some(out) = &cli.out {
        *cfg.out_mut() = Some(out.clone());
    }
    let out = cfg
        .out_mut()
        .clone()
        .ok_or_else(|| CliError::Config("no output path: pass --out or set \"out\" in the config".into()))?;
    if cli.dump_codes && cli.command != Command::EmbedMc {
        return Err(CliError::Config("--dump-codes is only supported by embed-mc".into()));
    }
    let seed = *cfg.seed_mut();

    let started = unix_now();
    let run = cfg.execute(cli.dump_codes)?;
    write_atomic(&out, &run.table.to_csv()?)?;
    let codes = match &run.codes {
        Some(codes) => {
            let path = codes_path(&out);
            let bytes: Vec<u8> = codes.iter().flat_map(|c| c.to_bytes()).collect();
            write_atomic(&path, &bytes)?;
            Some(path)
        }
        None => None,
    };
    let manifest = RunManifest {
        manifest_version: MANIFEST_VERSION,
        tool: "onebit-rip",
        tool_version: env!("CARGO_PKG_VERSION"),
        subcommand: cli.command.name(),
        config: serde_json::to_value(&cfg).map_err(|e| CliError::Config(e.to_string()))?,
        seed,
        started_unix: started,
        finished_unix: unix_now(),
        csv: out.clone(),
        codes,
        trial_seeds: run.trial_seeds,
        passed: run.passed,
        summary: run.summary,
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
    write_atomic(&manifest_path(&out), &json)?;
    Ok(if run.passed {
        Outcome::Passed
    } else {
        Outcome::CheckFailed
    })
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(k) = thread_count(cli)? {
        configure_threads(k);
    }
    match cli.command {
        Command::MetricTable => run_experiment::<MetricTableConfig>(cli),
        Command::EmbedMc => run_experiment::<EmbedMcConfig>(cli),
        Command::RipSweep => run_experiment::<RipSweepConfig>(cli),
        Command::NoisyFloor => run_experiment::<NoisyFloorConfig>(cli),
        Command::Vc => run_experiment::<VcConfig>(cli),
    }
}

/// Parses arguments and runs, mapping everything onto exit codes 0, 1 and 2.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if outcome == Outcome::CheckFailed {
                eprintln!("{}: a declared check failed; see the manifest summary", cli.command.name());
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
