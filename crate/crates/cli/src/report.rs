//! JSON run reports and CSV side files.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use riskbudget::{SolveReport, Termination};
use serde::Serialize;

use crate::args::SolveArgs;

/// Version tag written into every report.
pub const SCHEMA: &str = "rb/1";

#[derive(Debug, Serialize)]
pub struct GapPoint {
    pub iteration: usize,
    pub lower: Option<f64>,
    pub upper: f64,
    pub gap: Option<f64>,
}

/// Output of `riskbudget solve`.
#[derive(Debug, Serialize)]
pub struct SolveOutput<'a> {
    pub schema: &'static str,
    pub weights: &'a [f64],
    pub exposure: &'a [f64],
    pub t_star: Option<f64>,
    pub t_star_weights: Option<f64>,
    pub risk: f64,
    pub contributions: &'a [f64],
    pub normalized_contributions: Vec<f64>,
    pub iterations: usize,
    pub gap_trace: Vec<GapPoint>,
    pub termination: Termination,
    pub floor_distance: f64,
    pub config_echo: &'a SolveArgs,
    pub seed: u64,
}

impl<'a> SolveOutput<'a> {
    pub fn new(report: &'a SolveReport, args: &'a SolveArgs) -> Self {
        Self {
            schema: SCHEMA,
            weights: &report.weights,
            exposure: &report.exposure,
            t_star: report.t_star,
            t_star_weights: report.t_star_weights,
            risk: report.risk,
            contributions: &report.contributions,
            normalized_contributions: report.normalized_contributions(),
            iterations: report.iterations,
            gap_trace: report
                .trace
                .iter()
                .map(|p| GapPoint {
                    iteration: p.iteration,
                    lower: p.lower,
                    upper: p.upper,
                    gap: p.gap(),
                })
                .collect(),
            termination: report.termination,
            floor_distance: report.floor_distance,
            config_echo: args,
            seed: args.seed,
        }
    }
}

/// Output of `riskbudget contributions`.
#[derive(Debug, Serialize)]
pub struct ContributionsOutput {
    pub schema: &'static str,
    pub weights: Vec<f64>,
    pub risk: f64,
    pub contributions: Vec<f64>,
    pub normalized_contributions: Vec<f64>,
}

/// Output of `riskbudget verify`.
#[derive(Debug, Serialize)]
pub struct VerifyOutput {
    pub schema: &'static str,
    pub pairwise_residual: f64,
    pub euler_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub risk: f64,
    pub contributions: Vec<f64>,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Writes `gap_trace.csv` and `weights.csv` into `dir`.
pub fn write_plot_files(dir: &Path, report: &SolveReport, budgets: &[f64]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut trace = csv::Writer::from_path(dir.join("gap_trace.csv"))?;
    trace.write_record(["iteration", "lower", "upper", "gap"])?;
    for p in &report.trace {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        trace.write_record([
            p.iteration.to_string(),
            opt(p.lower),
            p.upper.to_string(),
            opt(p.gap()),
        ])?;
    }
    trace.flush()?;
    let mut weights = csv::Writer::from_path(dir.join("weights.csv"))?;
    weights.write_record([
        "asset",
        "weight",
        "contribution",
        "normalized_contribution",
        "budget",
    ])?;
    let normalized = report.normalized_contributions();
    for i in 0..report.weights.len() {
        weights.write_record([
            i.to_string(),
            report.weights[i].to_string(),
            report.contributions[i].to_string(),
            normalized[i].to_string(),
            budgets[i].to_string(),
        ])?;
    }
    weights.flush()?;
    Ok(())
}
