//! Command-line definitions.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mobility",
    version,
    about = "Income-mobility pipeline: calibration, mixing times, first-passage times, and simulation checks"
)]
pub struct Cli {
    /// Optional `key = value` settings file; command-line flags win on
    /// conflict.
    #[arg(long, value_name = "FILE", global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Fit model parameters to each year of a panel; writes calibration.csv.
    Calibrate(CalibrateArgs),
    /// Mixing time (years) for explicitly given model parameters.
    Mixing(MixingArgs),
    /// Mean first-passage times for explicitly given model parameters.
    Mfpt(MfptArgs),
    /// Monte Carlo estimates used to cross-check the analytic pipeline.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Full pipeline: calibrate a panel, then mixing and passage times per
    /// year, with CSV/JSON tables and SVG charts.
    Report(ReportArgs),
    /// Convert a long-format share export plus a labor-flow table into the
    /// normalized panel schema.
    AdaptWid(AdaptWidArgs),
}

/// Model parameters, either from flags or from the config file.
#[derive(Args, Clone, Copy, Default)]
pub struct ParamFlags {
    /// Proportional income growth rate (per year).
    #[arg(long, value_name = "MU")]
    pub drift: Option<f64>,
    /// Proportional income volatility (per sqrt-year).
    #[arg(long, value_name = "SIGMA")]
    pub volatility: Option<f64>,
    /// Job-transition (reset) rate (per year).
    #[arg(long, value_name = "R")]
    pub reset_rate: Option<f64>,
    /// Income level the process restarts from; incomes are reported as
    /// multiples of it.
    #[arg(long, value_name = "X0")]
    pub reset_level: Option<f64>,
}

#[derive(Args, Clone, Copy, Default)]
pub struct EpsilonFlags {
    /// Total-variation threshold defining the mixing time (default 0.05).
    #[arg(long, conflicts_with = "epsilon_preset")]
    pub epsilon: Option<f64>,
    /// Named threshold preset.
    #[arg(long, value_enum, value_name = "PRESET")]
    pub epsilon_preset: Option<EpsilonPreset>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum EpsilonPreset {
    /// epsilon = 1/e, the customary relaxation-time threshold.
    #[value(name = "one-over-e")]
    OneOverE,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
pub struct CalibrateArgs {
    /// Normalized panel CSV (year,top1_share,separations,employment).
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Directory for calibration.csv (created if missing).
    #[arg(long, value_name = "DIR")]
    pub output_dir: PathBuf,
    /// Fixed volatility used by the calibration (default 0.2).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Treat the separation ratio as a one-year probability and convert it
    /// to a hazard rate.
    #[arg(long)]
    pub hazard_transform: bool,
}

#[derive(Args)]
pub struct MixingArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub epsilon: EpsilonFlags,
}

#[derive(Args)]
pub struct MfptArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    /// Comma-separated percentile pairs, e.g. 50:75,50:90 (the default).
    #[arg(long, value_name = "PAIRS")]
    pub percentile_pairs: Option<String>,
    /// Explicit income levels start:target (multiples of the reset level)
    /// instead of percentiles.
    #[arg(long, value_name = "START:TARGET", conflicts_with = "percentile_pairs")]
    pub levels: Option<String>,
}

#[derive(Subcommand)]
pub enum SimulateCmd {
    /// Draw incomes from the stationary law; writes stationary_sample.csv.
    Stationary(SimStationaryArgs),
    /// Estimate a mean first-passage time by path simulation; writes
    /// mfpt_sim.csv.
    Mfpt(SimMfptArgs),
    /// Empirical distance-to-stationarity curve; writes tv_sim.csv.
    Tv(SimTvArgs),
}

#[derive(Args, Clone, Copy, Default)]
pub struct SimFlags {
    /// Seed of the per-path random streams (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of simulated paths (default 10000).
    #[arg(long)]
    pub n_paths: Option<usize>,
}

#[derive(Args)]
pub struct SimStationaryArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub sim: SimFlags,
    /// Directory for the sample file (created if missing).
    #[arg(long, value_name = "DIR")]
    pub output_dir: PathBuf,
    /// Warm-up horizon in years before sampling (default 100).
    #[arg(long)]
    pub burn_in: Option<f64>,
}

#[derive(Args)]
pub struct SimMfptArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub sim: SimFlags,
    /// Directory for the estimate file (created if missing).
    #[arg(long, value_name = "DIR")]
    pub output_dir: PathBuf,
    /// Start income, as a multiple of the reset level.
    #[arg(long)]
    pub from_level: f64,
    /// Target income, as a multiple of the reset level.
    #[arg(long)]
    pub to_level: f64,
    /// Euler step in years (default 0.01).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Disable the Brownian-bridge barrier correction (for step-size
    /// studies; estimates are biased late without it).
    #[arg(long)]
    pub no_bridge: bool,
    /// Hard cap on simulated passage times in years (default: 50x the
    /// analytic mean).
    #[arg(long)]
    pub horizon_cap: Option<f64>,
}

#[derive(Args)]
pub struct SimTvArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub sim: SimFlags,
    /// Directory for the curve file (created if missing).
    #[arg(long, value_name = "DIR")]
    pub output_dir: PathBuf,
    /// Comma-separated observation times in years, e.g. 0.5,1,2,4.
    #[arg(long, value_name = "TIMES")]
    pub times: Option<String>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Normalized panel CSV (year,top1_share,separations,employment).
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Directory for report files (created if missing).
    #[arg(long, value_name = "DIR")]
    pub output_dir: PathBuf,
    /// Fixed volatility used by the calibration (default 0.2).
    #[arg(long)]
    pub sigma: Option<f64>,
    #[command(flatten)]
    pub epsilon: EpsilonFlags,
    /// Comma-separated percentile pairs for passage times
    /// (default 50:75,50:90).
    #[arg(long, value_name = "PAIRS")]
    pub percentile_pairs: Option<String>,
    /// Treat the separation ratio as a one-year probability and convert it
    /// to a hazard rate.
    #[arg(long)]
    pub hazard_transform: bool,
    /// Volatility grid lo:hi:n; re-runs calibration and mixing times per
    /// grid value and writes sigma_sweep.csv.
    #[arg(long, value_name = "LO:HI:N")]
    pub sigma_sweep: Option<String>,
    /// Output format; `json` adds report.json next to report.csv.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Args)]
pub struct AdaptWidArgs {
    /// Long-format share export (one row per country/variable/percentile/
    /// year observation).
    #[arg(long, value_name = "FILE")]
    pub wid: PathBuf,
    /// Labor-flow CSV (year,separations,employment).
    #[arg(long, value_name = "FILE")]
    pub flows: PathBuf,
    /// Output path for the normalized panel CSV.
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    /// Country code to select, e.g. MK.
    #[arg(long)]
    pub country: String,
    /// Variable code of the share series.
    #[arg(long)]
    pub variable: String,
    /// Percentile-group code of the top group.
    #[arg(long)]
    pub percentile: String,
    /// Field delimiter of the long-format file (default ';').
    #[arg(long)]
    pub delimiter: Option<char>,
}
