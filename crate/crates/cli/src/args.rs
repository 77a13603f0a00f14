use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use lppl::supply_demand::Quarter;
use lppl::ModelKind;

#[derive(Debug, Parser)]
#[command(name = "lppl", version, about = "Log-periodic power law bubble diagnostics")]
pub struct Cli {
    /// JSON or TOML file with `fit`, `bootstrap`, `freq`, `seed` and `workers` sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// PRNG seed for bootstrap and synth (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for scan and bootstrap; never changes results.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Calibrate one model variant on one window.
    Fit(FitCmd),
    /// Calibrate over shrinking windows with a fixed last date.
    Scan(ScanCmd),
    /// Block-bootstrap distribution of the critical time.
    Bootstrap(BootstrapCmd),
    /// Lomb periodogram of raw samples, or the log-periodicity test of a fit.
    Lomb(LombCmd),
    /// Supply/demand gaps and agency discrepancies.
    Supply(SupplyCmd),
    /// Re-express a price series in another currency.
    Convert(ConvertCmd),
    /// Generate a synthetic LPPL price series.
    Synth(SynthCmd),
}

#[derive(Debug, Clone, Args)]
pub struct CsvArgs {
    #[arg(long, default_value = "date")]
    pub date_col: String,
    #[arg(long, default_value = "value")]
    pub value_col: String,
    #[arg(long, default_value = "%Y-%m-%d")]
    pub date_format: String,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// First date of the window (default: first observation).
    #[arg(long)]
    pub t_start: Option<NaiveDate>,
    /// Last date of the window (default: last observation).
    #[arg(long)]
    pub t_last: Option<NaiveDate>,
}

/// Overrides applied on top of the configuration file.
#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Weierstrass harmonic count.
    #[arg(long)]
    pub harmonics: Option<usize>,
    #[arg(long)]
    pub m_min: Option<f64>,
    #[arg(long)]
    pub m_max: Option<f64>,
    #[arg(long)]
    pub omega_min: Option<f64>,
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// Latest accepted critical time, in years after the last observation.
    #[arg(long)]
    pub tc_max_years: Option<f64>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub min_points: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FreqArgs {
    #[arg(long)]
    pub freq_min: Option<f64>,
    #[arg(long)]
    pub freq_max: Option<f64>,
    #[arg(long)]
    pub freq_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitCmd {
    /// Price CSV.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value = "simple")]
    pub model: ModelKind,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Args)]
pub struct ScanCmd {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Comma-separated model variants.
    #[arg(long, value_delimiter = ',', default_value = "simple")]
    pub models: Vec<ModelKind>,
    #[arg(long)]
    pub t_start_min: NaiveDate,
    #[arg(long)]
    pub t_start_max: NaiveDate,
    /// Default: last observation.
    #[arg(long)]
    pub t_last: Option<NaiveDate>,
    /// Calendar days between start dates (default 5).
    #[arg(long)]
    pub step: Option<u32>,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Args)]
pub struct BootstrapCmd {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value = "simple")]
    pub model: ModelKind,
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Residual block length in observations (default 21).
    #[arg(long)]
    pub block_len: Option<usize>,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Args)]
pub struct LombCmd {
    /// CSV of raw `(x, y)` samples; the periodogram is computed directly.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub samples: Option<PathBuf>,
    #[arg(long, default_value = "x")]
    pub x_col: String,
    #[arg(long, default_value = "y")]
    pub y_col: String,
    /// Price CSV; the window is fitted and its log-periodicity tested.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "simple")]
    pub model: ModelKind,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub freq: FreqArgs,
}

#[derive(Debug, Args)]
pub struct SupplyCmd {
    /// CSV with year, quarter, agency, demand_mbd, supply_mbd.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value = "EIA")]
    pub agency_a: String,
    #[arg(long, default_value = "IEA")]
    pub agency_b: String,
    #[arg(long, default_value = "2006Q1")]
    pub cutoff: Quarter,
}

#[derive(Debug, Args)]
pub struct ConvertCmd {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Rates quoted as units of the input currency per unit of the target.
    #[arg(long)]
    pub fx: PathBuf,
    #[arg(long, default_value = "value")]
    pub fx_value_col: String,
    /// Target currency code used in the series label.
    #[arg(long)]
    pub currency: String,
    #[arg(long, default_value = "converted.csv")]
    pub output: String,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    None,
    Iid,
    Ar1,
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    /// First business day.
    #[arg(long)]
    pub start: NaiveDate,
    /// Last business day.
    #[arg(long)]
    pub end: NaiveDate,
    /// JSON parameter set (any variant, `tc` in years from `start`); replaces
    /// the simple-model flags below.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Critical time in years after `end`.
    #[arg(long, default_value_t = 0.2)]
    pub tc_offset: f64,
    #[arg(long, default_value_t = 0.5)]
    pub m: f64,
    #[arg(long, default_value_t = 7.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
    #[arg(long, default_value_t = 4.6, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = NoiseArg::Iid)]
    pub noise: NoiseArg,
    #[arg(long, default_value_t = 0.005)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub rho: f64,
    #[arg(long, default_value = "synth.csv")]
    pub output: String,
}
