use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "taulasso", version, about = "Robust sparse regression with the tau-Lasso")]
pub struct Cli {
    /// Worker threads for parallel trials and grids.
    #[arg(long, global = true, env = "TAULASSO_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit on a CSV dataset at a given λ or with cross-validated λ.
    Fit(FitArgs),
    /// Cross-validate λ on a CSV dataset and report the CV curve.
    Cv(FitArgs),
    /// Monte-Carlo table experiment.
    Simulate(SimulateArgs),
    /// RMSE against outlier magnitude, or norm bounds under gross contamination.
    Breakdown(BreakdownArgs),
    /// Coefficient bias along a common λ path.
    Overshrink(OvershrinkArgs),
    /// Influence function against the sensitivity curve on the toy model.
    Influence(InfluenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorArg {
    TauLasso,
    #[value(alias = "adaptive-tau-lasso")]
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PilotArg {
    SRidge,
    TauLasso,
}

/// Tuning and model-selection overrides shared by the commands.
#[derive(Debug, Clone, Args)]
pub struct TuningArgs {
    /// Breakdown level of the M-scale; c0 is recalibrated unless given.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub c1: Option<f64>,
    /// Exponent of the adaptive weights.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Lower bound on the pilot magnitudes.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon_floor: f64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 30)]
    pub n_lambda: usize,
    /// Smallest λ of the grid relative to λ_max.
    #[arg(long, default_value_t = 1e-3)]
    pub lambda_ratio: f64,
    /// Starting points of the solver, including the zero start.
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    /// Fit on the data as given instead of robustly standardizing it.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV with a header row; the first column `y` is the response.
    #[arg(long)]
    pub input: PathBuf,
    /// JSON result path; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EstimatorArg::TauLasso)]
    pub estimator: EstimatorArg,
    #[arg(long, value_enum, default_value_t = PilotArg::SRidge)]
    pub pilot: PilotArg,
    /// Penalty on the (standardized) working problem.
    #[arg(long, conflicts_with = "cv")]
    pub lambda: Option<f64>,
    /// Select λ by K-fold cross-validation.
    #[arg(long)]
    pub cv: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// scenario1 … scenario5.
    #[arg(long, default_value = "scenario1", conflicts_with = "spec")]
    pub scenario: String,
    /// JSON scenario specification used instead of a named scenario.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// normal, t3 or t1.
    #[arg(long = "error", default_value = "normal")]
    pub error_law: String,
    /// Training sample size overriding the scenario.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Contaminate the training sample with response and leverage outliers.
    #[arg(long)]
    pub contaminate: bool,
    /// Rows of the response outliers relative to the leverage rows:
    /// independent, disjoint or shared.
    #[arg(long, default_value = "independent", requires = "contaminate")]
    pub placement: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Comma-separated estimators: tau-lasso, adaptive-tau-lasso, oracle.
    #[arg(long, value_delimiter = ',', default_value = "adaptive-tau-lasso,tau-lasso,oracle")]
    pub estimators: Vec<String>,
    #[arg(long)]
    pub seed: u64,
    /// Exit with status 4 when more trials than this fraction fail.
    #[arg(long, default_value_t = 0.05)]
    pub max_failed: f64,
    /// CSV summary path; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Full JSON report with the resolved configuration.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BreakdownArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Outlier magnitudes as `lo:hi:N` (linear) or `lo:hi:logN`.
    #[arg(long, default_value = "0.1:100:log20", conflicts_with = "gross_magnitude")]
    pub ystar: String,
    /// Fraction of contaminated training rows.
    #[arg(long, default_value_t = 0.1)]
    pub fraction: f64,
    /// Replace rows with gross values of this magnitude and compare ‖β̂‖₂
    /// against the clean fit instead of tracing the RMSE curve.
    #[arg(long)]
    pub gross_magnitude: Option<f64>,
    /// Bound on ‖β̂ contaminated‖₂ / ‖β̂ clean‖₂ in gross mode.
    #[arg(long, default_value_t = 10.0)]
    pub bound_factor: f64,
    #[arg(long, value_delimiter = ',', default_value = "tau-lasso,adaptive-tau-lasso")]
    pub estimators: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub max_failed: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OvershrinkArgs {
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Comma-separated true coefficients.
    #[arg(long, value_delimiter = ',', default_value = "10,5,4,3,2,0,0,0,0,0")]
    pub beta0: Vec<f64>,
    #[arg(long, default_value_t = 35.0)]
    pub snr_db: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub max_failed: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

#[derive(Debug, Clone, Args)]
pub struct InfluenceArgs {
    /// One predictor, no intercept, standard normal design and errors.
    #[arg(long)]
    pub toy_1d: bool,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1.5)]
    pub beta0: f64,
    /// The penalty is this value divided by n.
    #[arg(long, default_value_t = 0.1)]
    pub lambda_scale: f64,
    /// Grid for both y0 and x0 as `min:max:step`.
    #[arg(long, default_value = "-10:10:1", allow_hyphen_values = true)]
    pub grid: String,
    /// Surface written to the CSV.
    #[arg(long, value_enum, default_value_t = EstimatorArg::Adaptive)]
    pub estimator: EstimatorArg,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}
