use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lrdlab::estimators::Method;
use lrdlab::transform::TransformSpec;

#[derive(Debug, Parser)]
#[command(
    name = "lrdlab",
    version,
    about = "Long-memory processes, Hermite ranks and Hurst estimation",
    args_override_self = true
)]
pub struct Cli {
    /// Worker threads for Monte Carlo loops (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// JSON object whose entries override command-line flags.
    #[arg(long, global = true, value_name = "JSON")]
    pub config: Option<PathBuf>,

    /// Where to write manifest.json (default: next to the outputs).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a series and write it in the plain-text format.
    Simulate(SimulateArgs),
    /// Apply a transformation to a series file.
    Transform(TransformArgs),
    /// Estimate the Hurst index of a series file.
    Estimate(EstimateArgs),
    /// Hermite, shifted, power or generalized rank of a transformation.
    Rank(RankArgs),
    /// Squaring study with contrast replicates over a directory of series.
    Study(StudyArgs),
    /// Monte Carlo rate and limit experiments.
    Lab(LabArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Transform(_) => "transform",
            Command::Estimate(_) => "estimate",
            Command::Rank(_) => "rank",
            Command::Study(_) => "study",
            Command::Lab(_) => "lab",
        }
    }
}

fn parse_transform(s: &str) -> Result<TransformSpec, String> {
    s.parse().map_err(|e: lrdlab::LrdError| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: lrdlab::LrdError| e.to_string())
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("model").required(true).args(["fgn", "farima", "linear", "weak"])))]
pub struct SimulateArgs {
    /// Fractional Gaussian noise with this Hurst index.
    #[arg(long, value_name = "H")]
    pub fgn: Option<f64>,
    /// Gaussian FARIMA(0, d, 0).
    #[arg(long, value_name = "D")]
    pub farima: Option<f64>,
    /// Long-memory linear process with this Hurst index.
    #[arg(long, value_name = "H")]
    pub linear: Option<f64>,
    /// Weakly dependent model: iid, ar1:PHI or tanh-ar:PHI.
    #[arg(long, value_name = "MODEL")]
    pub weak: Option<String>,
    /// Innovation law for linear and weak models: gaussian, exp or t:DF.
    #[arg(long, default_value = "gaussian")]
    pub innovation: String,
    /// Truncation lag for the linear process.
    #[arg(long)]
    pub truncation: Option<usize>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Transformation applied to the simulated path.
    #[arg(long, value_parser = parse_transform)]
    pub transform: Option<TransformSpec>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TransformArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_transform)]
    pub transform: TransformSpec,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// aggvar, gph, lw or whittle.
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Number of frequencies or blocks, or `auto`.
    #[arg(long, default_value = "auto")]
    pub bandwidth: String,
    /// Also write the CSV line to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMethod {
    Hermite,
    Shifted,
    Power,
    Generalized,
}

#[derive(Debug, Args, Serialize)]
pub struct RankArgs {
    #[arg(long, value_parser = parse_transform)]
    pub transform: Option<TransformSpec>,
    #[arg(long, value_enum, default_value = "hermite")]
    pub method: RankMethod,
    /// Shift for `--method shifted`.
    #[arg(long, allow_negative_numbers = true)]
    pub shift: Option<f64>,
    /// Marginal sample of Y for `--method power`.
    #[arg(long)]
    pub sample: Option<PathBuf>,
    /// Observed series for `--method generalized`.
    #[arg(long)]
    pub x: Option<PathBuf>,
    /// Gaussian driver for `--method generalized`.
    #[arg(long)]
    pub y: Option<PathBuf>,
    #[arg(long, default_value_t = lrdlab::hermite::DEFAULT_QUAD_TOL)]
    pub tol: f64,
    /// Significance threshold, in standard errors, for the Monte Carlo methods.
    #[arg(long, default_value_t = lrdlab::hermite::DEFAULT_MC_THRESHOLD)]
    pub threshold: f64,
    #[arg(long = "max-order")]
    pub max_order: Option<usize>,
    #[arg(long = "max-lag", default_value_t = 10)]
    pub max_lag: usize,
    /// Write the full rank report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct StudyArgs {
    /// Directory of series files, one series per file.
    #[arg(long = "data-dir")]
    pub data_dir: PathBuf,
    #[arg(long, value_parser = parse_method, default_value = "lw")]
    pub estimator: Method,
    /// Contrast replicates per series.
    #[arg(long = "R", default_value_t = lrdlab::study::DEFAULT_REPLICATES)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rerun the study on a synthetic fGn group matched to the selection.
    #[arg(long = "contrast-group")]
    pub contrast_group: bool,
    #[arg(long = "h-min", default_value_t = lrdlab::study::DEFAULT_H_WINDOW.0)]
    pub h_min: f64,
    #[arg(long = "h-max", default_value_t = lrdlab::study::DEFAULT_H_WINDOW.1)]
    pub h_max: f64,
    #[arg(long = "min-length", default_value_t = lrdlab::study::DEFAULT_MIN_LENGTH)]
    pub min_length: usize,
    #[arg(long, default_value = "study-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Scaling,
    Samplevar,
    Empirical,
    Whittlerate,
    Clt,
    Covariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatisticArg {
    Sum,
    Mean,
}

#[derive(Debug, Args, Serialize)]
pub struct LabArgs {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Comma-separated sample sizes (default depends on the experiment).
    #[arg(long = "n-grid", value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    /// Sample size for single-N experiments.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.8)]
    pub hurst: f64,
    /// Transformation or perturbation applied to the process.
    #[arg(long, value_parser = parse_transform)]
    pub transform: Option<TransformSpec>,
    /// Process for `scaling`: fgn:H, farima:D, linear:H, iid, ar1:PHI or tanh-ar:PHI.
    #[arg(long, default_value = "fgn:0.8")]
    pub process: String,
    /// Innovation law for linear and weak processes.
    #[arg(long, default_value = "gaussian")]
    pub innovation: String,
    #[arg(long, value_enum, default_value = "sum")]
    pub statistic: StatisticArg,
    /// Center by the population mean before summing.
    #[arg(long)]
    pub center: bool,
    /// Grid for `empirical`.
    #[arg(long = "x-grid", value_delimiter = ',', allow_negative_numbers = true)]
    pub x_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    /// Use iid Gaussians instead of fGn in `empirical`.
    #[arg(long)]
    pub iid: bool,
    /// Weak model for `clt`.
    #[arg(long, default_value = "ar1:0.5")]
    pub weak: String,
    /// Lag range for `covariance`, as LO,HI.
    #[arg(long, value_delimiter = ',', default_value = "10,100")]
    pub lags: Vec<usize>,
    #[arg(long, default_value = "lab-out")]
    pub out: PathBuf,
}
