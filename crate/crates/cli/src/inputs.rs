//! Turning flag values into library inputs.

use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::Result;
use riskbudget::io::{load_scenarios, read_columns2, read_scenarios, ValueKind};
use riskbudget::scenario::{
    generate_mu_sigma, sample_gaussian, sample_student_t, GaussianSpec, ParamGenSpec, StudentTSpec,
};
use riskbudget::types::Distortion;
use riskbudget::{BudgetVector, RiskSpec, ScenarioMatrix};
use serde_json::Value;

use crate::args::{Measure, MeasureArgs, Model, ModelArgs, ScenarioArgs, ValueKindArg};

/// Asset count of the parameter draw that smaller random problems are cut
/// from, so that every dimension shares the leading parameters.
pub const PARAM_DRAW_ASSETS: usize = 100;
/// Offset between the scenario seed and the seed of the parameter draw.
const PARAM_SEED_OFFSET: u64 = 0x5eed;

/// A bad flag value; reported with exit code 3.
#[derive(Debug)]
pub struct InputError {
    pub flag: &'static str,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.flag, self.message)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(flag: &'static str, message: impl fmt::Display) -> anyhow::Error {
    InputError {
        flag,
        message: message.to_string(),
    }
    .into()
}

/// Reads `arg` as inline JSON when it starts with `[` or `{`, else as a file.
fn json_or_file(flag: &'static str, arg: &str) -> Result<Value> {
    let text = if arg.trim_start().starts_with(['[', '{']) {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| input_error(flag, format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| input_error(flag, format!("invalid JSON: {e}")))
}

fn number_array(flag: &'static str, value: &Value) -> Result<Vec<f64>> {
    let items = value
        .as_array()
        .ok_or_else(|| input_error(flag, "expected a JSON array of numbers"))?;
    items
        .iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| input_error(flag, format!("not a number: {x}")))
        })
        .collect()
}

/// A vector given as a JSON array, or as a file with a JSON array or a single
/// CSV row or column.
pub fn parse_vector(flag: &'static str, arg: &str) -> Result<Vec<f64>> {
    if arg.trim_start().starts_with('[') || is_json_file(arg) {
        return number_array(flag, &json_or_file(flag, arg)?);
    }
    let sm = load_scenarios(arg, ValueKind::Losses).map_err(|e| input_error(flag, e))?;
    if sm.n_scenarios() != 1 && sm.n_assets() != 1 {
        return Err(input_error(flag, "expected a single CSV row or column"));
    }
    Ok(sm.as_slice().to_vec())
}

/// A square matrix given as a JSON array of rows, or as a CSV file.
pub fn parse_matrix(flag: &'static str, arg: &str) -> Result<(usize, Vec<f64>)> {
    let (rows, data) = if arg.trim_start().starts_with('[') || is_json_file(arg) {
        let value = json_or_file(flag, arg)?;
        let rows = value
            .as_array()
            .ok_or_else(|| input_error(flag, "expected a JSON array of rows"))?;
        let mut data = Vec::new();
        for row in rows {
            data.extend(number_array(flag, row)?);
        }
        (rows.len(), data)
    } else {
        let sm = load_scenarios(arg, ValueKind::Losses).map_err(|e| input_error(flag, e))?;
        (sm.n_scenarios(), sm.as_slice().to_vec())
    };
    if rows == 0 || data.len() != rows * rows {
        return Err(input_error(flag, "expected a square matrix"));
    }
    Ok((rows, data))
}

fn is_json_file(arg: &str) -> bool {
    Path::new(arg)
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("json"))
}

/// Budgets `equal`, or a JSON array (inline or in a file) of positive numbers.
pub fn parse_budgets(arg: &str, d: usize) -> Result<BudgetVector> {
    if arg.trim() == "equal" {
        return Ok(BudgetVector::equal(d));
    }
    let raw = number_array("--budgets", &json_or_file("--budgets", arg)?)?;
    if raw.len() != d {
        return Err(input_error(
            "--budgets",
            format!("expected {d} budgets, got {}", raw.len()),
        ));
    }
    BudgetVector::new(raw).map_err(|e| input_error("--budgets", e))
}

/// Weights as a JSON array, or a file holding an array or a solve report.
pub fn parse_weights(arg: &str, d: usize) -> Result<Vec<f64>> {
    let value = json_or_file("--weights", arg)?;
    let array = match value.get("weights") {
        Some(inner) => inner.clone(),
        None => value,
    };
    let w = number_array("--weights", &array)?;
    if w.len() != d {
        return Err(input_error(
            "--weights",
            format!("expected {d} weights, got {}", w.len()),
        ));
    }
    if let Some(bad) = w.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(input_error(
            "--weights",
            format!("weights must be positive, got {bad}"),
        ));
    }
    Ok(w)
}

pub fn parse_gamma(arg: &str) -> Result<Distortion> {
    if arg == "sqrt" {
        return Ok(Distortion::sqrt());
    }
    let Some(path) = arg.strip_prefix("grid:") else {
        return Err(input_error("--gamma", "expected `sqrt` or `grid:PATH`"));
    };
    let file = fs::File::open(path).map_err(|e| input_error("--gamma", format!("{path}: {e}")))?;
    let (u, gamma) = read_columns2(file).map_err(|e| input_error("--gamma", e))?;
    Distortion::grid(u, gamma).map_err(|e| input_error("--gamma", e))
}

pub fn risk_spec(m: &MeasureArgs) -> Result<RiskSpec> {
    let spec = match m.measure {
        Measure::Es => RiskSpec::ExpectedShortfall { alpha: m.alpha },
        Measure::Evar => RiskSpec::EntropicVaR { alpha: m.alpha },
        Measure::Distortion => RiskSpec::Distortion(parse_gamma(&m.gamma)?),
    };
    spec.validate().map_err(|e| input_error("--alpha", e))?;
    Ok(spec)
}

/// A fully specified parametric model.
pub enum ModelSpec {
    Gaussian(GaussianSpec),
    StudentT(StudentTSpec),
}

impl ModelSpec {
    pub fn gaussian_part(&self) -> (&[f64], &[f64]) {
        match self {
            ModelSpec::Gaussian(s) => (&s.mu, &s.sigma),
            ModelSpec::StudentT(s) => (&s.mu, &s.sigma),
        }
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<ScenarioMatrix> {
        if n == 0 {
            return Err(input_error("--n", "scenario count must be positive"));
        }
        Ok(match self {
            ModelSpec::Gaussian(s) => sample_gaussian(s, n, seed)?,
            ModelSpec::StudentT(s) => sample_student_t(s, n, seed)?,
        })
    }
}

/// Random parameters for `d` assets: the leading block of a larger draw.
pub fn random_parameters(d: usize, seed: u64) -> Result<GaussianSpec> {
    if d == 0 {
        return Err(input_error("--assets", "asset count must be positive"));
    }
    let full = generate_mu_sigma(
        &ParamGenSpec::new(d.max(PARAM_DRAW_ASSETS)),
        seed.wrapping_add(PARAM_SEED_OFFSET),
    )?;
    Ok(full.leading(d)?)
}

pub fn model_spec(kind: Model, nu: f64, gaussian: GaussianSpec) -> Result<ModelSpec> {
    Ok(match kind {
        Model::Gaussian => ModelSpec::Gaussian(gaussian),
        Model::StudentT => ModelSpec::StudentT(
            StudentTSpec::new(gaussian.mu, gaussian.sigma, nu)
                .map_err(|e| input_error("--nu", e))?,
        ),
    })
}

pub fn build_model(args: &ModelArgs, seed: u64) -> Result<ModelSpec> {
    let kind = args
        .model
        .ok_or_else(|| input_error("--model", "either --scenarios or --model is required"))?;
    let gaussian = match (&args.mu, &args.cov, args.assets) {
        (Some(mu), Some(cov), _) => {
            let mu = parse_vector("--mu", mu)?;
            let (d, sigma) = parse_matrix("--cov", cov)?;
            if d != mu.len() {
                return Err(input_error(
                    "--cov",
                    format!("{d}x{d} matrix does not match {} means", mu.len()),
                ));
            }
            GaussianSpec::new(mu, sigma).map_err(|e| input_error("--cov", e))?
        }
        (None, None, Some(d)) => random_parameters(d, seed)?,
        (Some(_), None, _) => return Err(input_error("--cov", "required with --mu")),
        (None, Some(_), _) => return Err(input_error("--mu", "required with --cov")),
        (None, None, None) => {
            return Err(input_error(
                "--assets",
                "give --mu and --cov, or --assets for random parameters",
            ))
        }
    };
    model_spec(kind, args.nu, gaussian)
}

/// Loads or simulates the scenario matrix; the model is returned too when
/// the scenarios were simulated.
pub fn scenarios(args: &ScenarioArgs, seed: u64) -> Result<(ScenarioMatrix, Option<ModelSpec>)> {
    if let Some(path) = &args.scenarios {
        let kind = match args.values {
            ValueKindArg::Losses => ValueKind::Losses,
            ValueKindArg::Returns => ValueKind::Returns,
        };
        let file = fs::File::open(path)
            .map_err(|e| input_error("--scenarios", format!("{}: {e}", path.display())))?;
        let sm = read_scenarios(file, kind).map_err(|e| input_error("--scenarios", e))?;
        return Ok((sm, None));
    }
    let model = build_model(&args.model, seed)?;
    let sm = model.sample(args.model.n, seed)?;
    Ok((sm, Some(model)))
}
