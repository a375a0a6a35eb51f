//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "riskbudget",
    version,
    about = "Risk-budgeting portfolios from loss scenarios"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a risk-budgeting portfolio and write a JSON report.
    Solve(SolveArgs),
    /// Draw scenarios from a parametric model and write them as CSV.
    Simulate(SimulateArgs),
    /// Risk contributions of a given weight vector.
    Contributions(ContributionsArgs),
    /// Check the risk-budgeting conditions for a given weight vector.
    Verify(VerifyArgs),
    /// Time the solvers over a grid of dimensions and scenario counts.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Gaussian,
    StudentT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Es,
    Evar,
    Distortion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Cp,
    CpGeneral,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueKindArg {
    Losses,
    Returns,
}

/// Parametric scenario model.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Distribution of asset returns.
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// Mean returns: a JSON array, or a file holding one (JSON or CSV).
    #[arg(long)]
    pub mu: Option<String>,
    /// Covariance (dispersion for Student t): a JSON array of rows, or a
    /// CSV/JSON file.
    #[arg(long)]
    pub cov: Option<String>,
    /// Degrees of freedom of the Student t model.
    #[arg(long, default_value_t = 5.0)]
    pub nu: f64,
    /// Number of assets when --mu and --cov are omitted; the parameters are
    /// then generated at random from --seed.
    #[arg(long)]
    pub assets: Option<usize>,
    /// Number of scenarios to draw.
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
}

/// Where the scenarios come from.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ScenarioArgs {
    /// Scenario CSV file, one scenario per row.
    #[arg(long, conflicts_with = "model")]
    pub scenarios: Option<PathBuf>,
    /// Sign convention of a scenario file without a header line.
    #[arg(long, value_enum, default_value_t = ValueKindArg::Losses)]
    pub values: ValueKindArg,
    #[command(flatten)]
    pub model: ModelArgs,
}

/// Risk measure selection.
#[derive(Debug, Clone, Args, Serialize)]
pub struct MeasureArgs {
    #[arg(long, value_enum, default_value_t = Measure::Es)]
    pub measure: Measure,
    /// Confidence level for es and evar.
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    /// Distortion weight function: `sqrt` or `grid:PATH` with a two-column
    /// (u, gamma) CSV.
    #[arg(long, default_value = "sqrt")]
    pub gamma: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub scenarios: ScenarioArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Risk budgets: `equal`, a JSON array, or a file holding a JSON array.
    #[arg(long, default_value = "equal")]
    pub budgets: String,
    #[arg(long, value_enum, default_value_t = Algorithm::Cp)]
    pub algorithm: Algorithm,
    /// Stopping tolerance on the cutting-plane gap.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Iteration cap of the cutting-plane solvers.
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Upper bound on each exposure; defaults to 1000 times the asset count.
    #[arg(long)]
    pub box_bound: Option<f64>,
    /// Number of SGD steps.
    #[arg(long, default_value_t = 100_000)]
    pub sgd_steps: usize,
    /// Scenarios per SGD step.
    #[arg(long, default_value_t = 1)]
    pub sgd_batch: usize,
    /// Seed for scenario generation and SGD sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; standard output when omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Directory for gap-trace and weight CSV files.
    #[arg(long)]
    #[serde(skip)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ContributionsArgs {
    #[command(flatten)]
    pub scenarios: ScenarioArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Weights: a JSON array, or a file holding one or a solve report.
    #[arg(long)]
    pub weights: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub scenarios: ScenarioArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Weights: a JSON array, or a file holding one or a solve report.
    #[arg(long)]
    pub weights: String,
    #[arg(long, default_value = "equal")]
    pub budgets: String,
    /// Largest accepted residual.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated asset counts.
    #[arg(long, value_delimiter = ',', default_values_t = [2, 5, 10, 25, 50, 100])]
    pub d_list: Vec<usize>,
    /// Comma-separated scenario counts.
    #[arg(long, value_delimiter = ',', default_values_t = [1000, 2000, 3000, 4000, 5000])]
    pub n_list: Vec<usize>,
    /// Repetitions per grid cell.
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Risk measure; only es and evar have closed-form references.
    #[arg(long, value_enum, default_value_t = Measure::Es)]
    pub measure: Measure,
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Model::Gaussian)]
    pub model: Model,
    #[arg(long, default_value_t = 5.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Seed of the parameter draw and of the per-cell scenario seeds.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for a weights-per-cell CSV.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}
