use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "onlinefwer", version, about = "Online familywise error rate control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a stream of p-values and write one decision per hypothesis.
    Run(RunArgs),
    /// Simulate a grid of Gaussian models and write FWER/power estimates.
    Experiment(ExperimentArgs),
    /// Evaluate a power-theory solver over a grid.
    Solve(SolveArgs),
    /// Check a configuration and report every problem found.
    Validate(ValidateArgs),
}

/// Procedure settings; each flag overrides the same key of `--config`.
#[derive(Debug, Default, Clone, Args)]
pub struct ProcedureFlags {
    /// TOML file with the same keys as these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Procedure name, e.g. alpha-spending, addis, online-fallback-1.
    #[arg(long)]
    pub procedure: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// `q`, `logq`, or a file of explicit weights.
    #[arg(long)]
    pub series: Option<String>,
    /// Exponent of the q- or log-q-series.
    #[arg(long)]
    pub q: Option<f64>,
    /// Discarding threshold: one value or a comma-separated sequence.
    #[arg(long)]
    pub tau: Option<String>,
    /// Candidate threshold: one value or a comma-separated sequence.
    #[arg(long)]
    pub lambda: Option<String>,
    /// `batch`, a constant lag, or a comma-separated list.
    #[arg(long)]
    pub lags: Option<String>,
    /// Fallback weights: `one-step`, `lagged-gamma`, or a CSV file of rows.
    #[arg(long)]
    pub weights: Option<String>,
    /// Control the k-FWER instead of the FWER.
    #[arg(long)]
    pub k: Option<u32>,
    /// ADDIS-Sidak exponent budget: `scaled` or `printed`.
    #[arg(long)]
    pub sidak_budget: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Input file with a `p` column (and optional `batch_id`, `label`); `-` reads stdin.
    pub input: PathBuf,
    #[command(flatten)]
    pub procedure: ProcedureFlags,
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Named grid: fig1, fig2, clustered or fig6.
    #[arg(long)]
    pub preset: Option<String>,
    /// TOML file with a `preset` key or an `[experiment]` table.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// optimal-q, cstar, optimal-gamma or expected-discoveries.
    pub solver: String,
    /// Horizons, comma-separated; `inf` for an infinite horizon.
    #[arg(long)]
    pub n: Option<String>,
    /// Series exponents, comma-separated.
    #[arg(long)]
    pub q: Option<String>,
    /// `q` or `logq`.
    #[arg(long, default_value = "q")]
    pub series: String,
    /// Alternative means, comma-separated.
    #[arg(long, default_value = "4")]
    pub mu_a: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu_n: f64,
    /// Non-null probabilities, comma-separated.
    #[arg(long, default_value = "0.5")]
    pub pi_a: String,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Horizon of the varying-signal allocation.
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Configuration file; same as `--config`.
    pub file: Option<PathBuf>,
    #[command(flatten)]
    pub procedure: ProcedureFlags,
}
