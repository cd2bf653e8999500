//! Command-line front end for `interplay-core`.
//!
//! Every command reads a TOML run configuration (optional), applies flag
//! overrides, and writes its outputs into `--out`. Output files carry the tool
//! version and a hash of the effective configuration and input bytes, and are
//! byte-identical across runs and worker counts.

pub mod commands;
pub mod config;
pub mod output;
pub mod schema;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{execute, Outcome};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "INTERPLAY_WORKERS";

#[derive(Debug, Clone, Parser)]
#[command(name = "interplay", version, about = "Multi-order interaction analysis of black-box scorers")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, env = WORKERS_ENV, value_name = "N")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Exact interactions I^(m)(i, j) for all orders by enumeration.
    Exact(ExactArgs),
    /// Sampled interaction estimates with standard errors.
    Estimate(EstimateArgs),
    /// Relative strength profile J^(m) for one model over a set of inputs.
    Profile(ProfileArgs),
    /// AMRIS values for strength profiles.
    Amris(AmrisArgs),
    /// Search (a, b, c) maximizing the correlation of AMRIS with robustness metrics.
    Gridsearch(GridsearchArgs),
    /// Run the reward-table checks (reward sums, cutout, mixing, suppression, relabeling).
    Verify(VerifyArgs),
    /// Pearson correlation of AMRIS with robustness metrics at fixed (a, b, c).
    Correlate(CorrelateArgs),
    /// Serve built-in scorers over the line protocol on stdin/stdout.
    #[command(hide = true)]
    ServeScorer(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutArg {
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

/// Overrides shared by commands that evaluate games.
#[derive(Debug, Clone, Default, Args)]
pub struct GameOverrides {
    /// Baseline file for masked games: JSON array or raw little-endian f64.
    #[arg(long, value_name = "PATH")]
    pub baseline: Option<PathBuf>,

    /// External scorer command line, split on whitespace.
    #[arg(long, value_name = "CMD")]
    pub scorer_cmd: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SampleOverrides {
    #[arg(long)]
    pub seed: Option<u64>,

    /// Contexts sampled per (pair, order) cell.
    #[arg(long, value_name = "K")]
    pub samples: Option<usize>,

    /// Pairs sampled per input.
    #[arg(long, value_name = "K")]
    pub pairs: Option<usize>,

    /// Order grid as comma-separated fractions of n, e.g. `0,0.1,0.5`.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AmrisOverrides {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    /// Game set JSON.
    #[arg(long, value_name = "PATH")]
    pub games: PathBuf,
    /// Restrict to one pair, e.g. `0,1`.
    #[arg(long, value_name = "I,J", value_delimiter = ',')]
    pub pair: Option<Vec<usize>>,
    #[command(flatten)]
    pub game: GameOverrides,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[arg(long, value_name = "PATH")]
    pub games: PathBuf,
    #[command(flatten)]
    pub sample: SampleOverrides,
    #[command(flatten)]
    pub game: GameOverrides,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    /// Game set JSON; each game is one input of the model.
    #[arg(long, value_name = "PATH")]
    pub games: PathBuf,
    #[arg(long, value_name = "ID")]
    pub model_id: String,
    #[command(flatten)]
    pub sample: SampleOverrides,
    #[command(flatten)]
    pub game: GameOverrides,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args)]
pub struct AmrisArgs {
    /// Profile JSON files.
    #[arg(long = "profile", value_name = "PATH", required = true)]
    pub profiles: Vec<PathBuf>,
    #[command(flatten)]
    pub amris: AmrisOverrides,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args)]
pub struct GridsearchArgs {
    #[arg(long = "profile", value_name = "PATH", required = true)]
    pub profiles: Vec<PathBuf>,
    /// Metric table CSV (`model_id,metric,value,polarity`).
    #[arg(long, value_name = "PATH")]
    pub metrics: PathBuf,
    /// Lattice spacing for a, b and c.
    #[arg(long)]
    pub step: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelateArgs {
    #[arg(long = "profile", value_name = "PATH", required = true)]
    pub profiles: Vec<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub metrics: PathBuf,
    #[command(flatten)]
    pub amris: AmrisOverrides,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Reward table JSON files.
    #[arg(long = "rewards", value_name = "PATH", required = true)]
    pub rewards: Vec<PathBuf>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// Inputs and scorer JSON.
    #[arg(long, value_name = "PATH")]
    pub inputs: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub baseline: Option<PathBuf>,
}
