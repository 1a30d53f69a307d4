//! `qbsim` command-line front end.
//!
//! Every command reads an optional TOML manifest (`--config`), applies
//! `--set key=value` pairs and then the dedicated flags on top, and writes
//! CSV or text artifacts. Exit code 0 means all outputs were written and all
//! checks passed, 2 means the inputs failed validation, 1 covers everything
//! else.

mod commands;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use qbsim::{Error, SimConfig};

pub use commands::{CDF_FILE, FADED_SISO_FILE, ORACLE_CHANNELS, RAW_FILE, SUMMARY_FILE};

#[derive(Debug, Parser)]
#[command(name = "qbsim", version, about = "Multiantenna quantum backscatter link simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub args: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Round-trip transmissivity from the link budget.
    LinkBudget,
    /// Build a channel matrix (two-path, clutter or fading draw).
    Channel,
    /// Decompose a unitary into a beam-splitter mesh.
    Decompose,
    /// Chernoff BER table over a grid of mode counts.
    Ber,
    /// Rank sweep of P-MIMO and E-MIMO mode gains.
    Sweep,
    /// Cross-check the protocol formulas against Gaussian-state propagation.
    Oracle,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// TOML manifest.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (or directory for `sweep`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Input file (matrix text for `decompose`).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Override a manifest key, e.g. `--set eta=1e-5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub nt: Option<usize>,
    #[arg(long, global = true)]
    pub nr: Option<usize>,
    #[arg(long, global = true)]
    pub nb: Option<usize>,
    /// Rank list such as `1..8` or `1,2,4`.
    #[arg(long, global = true)]
    pub ranks: Option<String>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub ns: Option<f64>,
    #[arg(long, global = true)]
    pub nz: Option<f64>,
    /// classical, guha or zhuang.
    #[arg(long, global = true)]
    pub receiver: Option<String>,
    /// deterministic or double-rayleigh.
    #[arg(long, global = true)]
    pub channel: Option<String>,
    /// coherent or incoherent P-MIMO interference.
    #[arg(long, global = true)]
    pub interference: Option<String>,
    /// Worker threads for `sweep` (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

impl RunArgs {
    /// `--set` pairs followed by the dedicated flags, so flags win.
    pub fn overrides(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut out = Vec::new();
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("--set expects KEY=VALUE, got `{s}`")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        let quoted = |s: &str| format!("\"{s}\"");
        let flags = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("trials", self.trials.map(|v| v.to_string())),
            ("nt", self.nt.map(|v| v.to_string())),
            ("nr", self.nr.map(|v| v.to_string())),
            ("nb", self.nb.map(|v| v.to_string())),
            ("ranks", self.ranks.as_deref().map(quoted)),
            ("eta", self.eta.map(|v| format!("{v:?}"))),
            ("ns", self.ns.map(|v| format!("{v:?}"))),
            ("nz", self.nz.map(|v| format!("{v:?}"))),
            ("receiver", self.receiver.as_deref().map(quoted)),
            ("channel", self.channel.as_deref().map(quoted)),
            ("interference", self.interference.as_deref().map(quoted)),
        ];
        out.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
        Ok(out)
    }

    pub fn load_config(&self) -> Result<SimConfig, CliError> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path).map_err(|e| {
                CliError::Validation(format!("cannot read config {}: {e}", path.display()))
            })?,
            None => String::new(),
        };
        Ok(SimConfig::from_toml_with(&text, &self.overrides()?)?)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Sim(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
            CliError::Sim(e) => match e {
                Error::Io(_) | Error::ExcessiveRejections { .. } => 1,
                _ => 2,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Run one command, writing the human-readable report to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = cli.args.load_config()?;
    match cli.command {
        Command::LinkBudget => commands::link_budget(&cfg, &cli.args, stdout),
        Command::Channel => commands::channel(&cfg, &cli.args, stdout),
        Command::Decompose => commands::decompose(&cli.args, stdout),
        Command::Ber => commands::ber(&cfg, &cli.args, stdout),
        Command::Sweep => commands::sweep(&cfg, &cli.args, stdout),
        Command::Oracle => commands::oracle(&cfg, &cli.args, stdout),
    }
}
