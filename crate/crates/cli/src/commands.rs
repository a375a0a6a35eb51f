//! Subcommand implementations. Each returns the process exit code.

use std::fs;
use std::io::Write;
use std::time::Instant;

use anyhow::{Context, Result};
use riskbudget::cp_es::solve_rb_es;
use riskbudget::cp_general::{risk_contributions, solve_rb_general};
use riskbudget::io::write_scenarios;
use riskbudget::risk::evaluate;
use riskbudget::risk::gaussian::{
    elliptical_marginal_risks, es_multiplier, evar_multiplier, student_t_es_multiplier,
};
use riskbudget::scenario::{GaussianSampler, ScenarioSampler, StudentTSampler};
use riskbudget::sgd::{solve_rb_es_sgd, SgdConfig, SgdSource};
use riskbudget::verification::check_rb_conditions;
use riskbudget::{BudgetVector, RiskSpec, SolveReport, SolverConfig, Termination};

use crate::args::{
    Algorithm, BenchArgs, ContributionsArgs, Measure, Model, SimulateArgs, SolveArgs, VerifyArgs,
};
use crate::inputs::{
    build_model, input_error, model_spec, parse_budgets, parse_weights, random_parameters,
    risk_spec, scenarios, ModelSpec,
};
use crate::report::{
    to_json, write_plot_files, ContributionsOutput, SolveOutput, VerifyOutput, SCHEMA,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED_CHECK: u8 = 1;
pub const EXIT_ITERATION_LIMIT: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_OTHER: u8 = 4;

pub fn termination_code(t: Termination) -> u8 {
    match t {
        Termination::Converged => EXIT_OK,
        Termination::IterationLimit => EXIT_ITERATION_LIMIT,
        Termination::BoxBoundActive | Termination::Unbounded => EXIT_OTHER,
    }
}

/// Writes `text` to `path`, or to `stdout` when no path is given.
fn emit(path: Option<&std::path::Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => stdout
            .write_all(text.as_bytes())
            .context("writing to stdout"),
    }
}

fn sampler(model: &ModelSpec, seed: u64) -> Result<Box<dyn ScenarioSampler>> {
    Ok(match model {
        ModelSpec::Gaussian(s) => Box::new(GaussianSampler::new(s, seed)?),
        ModelSpec::StudentT(s) => Box::new(StudentTSampler::new(s, seed)?),
    })
}

fn run_solver(args: &SolveArgs, spec: &RiskSpec) -> Result<(SolveReport, Vec<f64>)> {
    let cfg = SolverConfig {
        tolerance: args.tol,
        max_iterations: args.max_iter,
        box_bound: args.box_bound,
        rng_seed: args.seed,
        ..SolverConfig::default()
    };
    let needs_es = |alg: &str| {
        input_error(
            "--algorithm",
            format!("{alg} supports only --measure es; use cp-general"),
        )
    };
    if args.algorithm == Algorithm::Sgd {
        let RiskSpec::ExpectedShortfall { alpha } = *spec else {
            return Err(needs_es("sgd"));
        };
        let sgd = SgdConfig {
            n_iterations: args.sgd_steps,
            batch: args.sgd_batch,
            seed: args.seed,
            evaluation_scenarios: args.scenarios.model.n,
            ..SgdConfig::default()
        };
        if args.scenarios.scenarios.is_some() {
            let (sm, _) = scenarios(&args.scenarios, args.seed)?;
            let budgets = parse_budgets(&args.budgets, sm.n_assets())?;
            let report = solve_rb_es_sgd(SgdSource::Saa(&sm), &budgets, alpha, &sgd)?;
            return Ok((report, budgets.proportional()));
        }
        let model = build_model(&args.scenarios.model, args.seed)?;
        let mut source = sampler(&model, args.seed)?;
        let budgets = parse_budgets(&args.budgets, source.n_assets())?;
        let report = solve_rb_es_sgd(SgdSource::Sampler(source.as_mut()), &budgets, alpha, &sgd)?;
        return Ok((report, budgets.proportional()));
    }
    let (sm, _) = scenarios(&args.scenarios, args.seed)?;
    let budgets = parse_budgets(&args.budgets, sm.n_assets())?;
    cfg.validate(sm.n_assets())
        .map_err(|e| input_error("--box-bound", e))?;
    let report = match args.algorithm {
        Algorithm::Cp => {
            let RiskSpec::ExpectedShortfall { alpha } = *spec else {
                return Err(needs_es("cp"));
            };
            solve_rb_es(&sm, &budgets, alpha, &cfg)?
        }
        _ => solve_rb_general(&sm, &budgets, spec, &cfg)?,
    };
    Ok((report, budgets.proportional()))
}

pub fn solve(args: &SolveArgs, stdout: &mut dyn Write) -> Result<u8> {
    if !(args.tol > 0.0) {
        return Err(input_error("--tol", "tolerance must be positive"));
    }
    if args.max_iter == 0 {
        return Err(input_error("--max-iter", "iteration cap must be positive"));
    }
    let spec = risk_spec(&args.measure)?;
    let (report, budgets) = run_solver(args, &spec)?;
    emit(
        args.out.as_deref(),
        &to_json(&SolveOutput::new(&report, args))?,
        stdout,
    )?;
    if let Some(dir) = &args.plot {
        write_plot_files(dir, &report, &budgets)?;
    }
    Ok(termination_code(report.termination))
}

pub fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<u8> {
    let model = build_model(&args.model, args.seed)?;
    let sm = model.sample(args.model.n, args.seed)?;
    let mut buf = Vec::new();
    write_scenarios(&sm, &mut buf)?;
    emit(args.out.as_deref(), &String::from_utf8(buf)?, stdout)?;
    Ok(EXIT_OK)
}

pub fn contributions(args: &ContributionsArgs, stdout: &mut dyn Write) -> Result<u8> {
    let spec = risk_spec(&args.measure)?;
    let (sm, _) = scenarios(&args.scenarios, args.seed)?;
    let w = parse_weights(&args.weights, sm.n_assets())?;
    let rc = risk_contributions(&sm, &w, &spec)?;
    let risk = evaluate(&sm, &w, &spec)?.value;
    let total: f64 = rc.iter().sum();
    let out = ContributionsOutput {
        schema: SCHEMA,
        normalized_contributions: rc.iter().map(|c| c / total).collect(),
        weights: w,
        risk,
        contributions: rc,
    };
    emit(None, &to_json(&out)?, stdout)?;
    Ok(EXIT_OK)
}

pub fn verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<u8> {
    let spec = risk_spec(&args.measure)?;
    let (sm, _) = scenarios(&args.scenarios, args.seed)?;
    let w = parse_weights(&args.weights, sm.n_assets())?;
    let budgets = parse_budgets(&args.budgets, sm.n_assets())?;
    let check = check_rb_conditions(&sm, &w, &budgets, &spec, args.tol)?;
    let out = VerifyOutput {
        schema: SCHEMA,
        pairwise_residual: check.pairwise,
        euler_residual: check.euler,
        tolerance: args.tol,
        passed: check.passed,
        risk: check.risk,
        contributions: check.contributions,
    };
    emit(None, &to_json(&out)?, stdout)?;
    Ok(if check.passed {
        EXIT_OK
    } else {
        EXIT_FAILED_CHECK
    })
}

/// Scale multiplier `kappa` with `rho = -mu^T w + kappa * sqrt(w^T Sigma w)`
/// for the bench model and measure.
fn closed_form_kappa(args: &BenchArgs) -> Result<f64> {
    match (args.model, args.measure) {
        (Model::Gaussian, Measure::Es) => Ok(es_multiplier(args.alpha)),
        (Model::Gaussian, Measure::Evar) => Ok(evar_multiplier(args.alpha)),
        (Model::StudentT, Measure::Es) => {
            student_t_es_multiplier(args.nu, args.alpha).map_err(|e| input_error("--nu", e))
        }
        (Model::StudentT, Measure::Evar) => Err(input_error(
            "--measure",
            "Entropic VaR is infinite for Student t losses",
        )),
        (_, Measure::Distortion) => Err(input_error(
            "--measure",
            "bench supports es and evar, which have closed-form contributions",
        )),
    }
}

/// Scenario seed of one grid cell. The parameters are drawn once per run, so
/// every dimension uses the leading block of the same draw.
fn cell_seed(base: u64, d: usize, n: usize, rep: usize) -> u64 {
    base.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((d as u64) << 40) ^ ((n as u64) << 8) ^ rep as u64
}

pub fn bench(args: &BenchArgs, stdout: &mut dyn Write) -> Result<u8> {
    if args.d_list.is_empty() || args.d_list.contains(&0) {
        return Err(input_error("--d-list", "asset counts must be positive"));
    }
    if args.n_list.is_empty() || args.n_list.contains(&0) {
        return Err(input_error("--n-list", "scenario counts must be positive"));
    }
    if args.reps == 0 {
        return Err(input_error("--reps", "repetitions must be positive"));
    }
    if !(args.tol > 0.0) {
        return Err(input_error("--tol", "tolerance must be positive"));
    }
    if !(0.0..1.0).contains(&args.alpha) {
        return Err(input_error(
            "--alpha",
            "confidence level must lie in [0, 1)",
        ));
    }
    let kappa = closed_form_kappa(args)?;
    let spec = match args.measure {
        Measure::Evar => RiskSpec::EntropicVaR { alpha: args.alpha },
        _ => RiskSpec::ExpectedShortfall { alpha: args.alpha },
    };
    let cfg = SolverConfig {
        tolerance: args.tol,
        ..SolverConfig::default()
    };
    let mut table = csv::Writer::from_writer(Vec::new());
    table.write_record([
        "d",
        "n",
        "rep",
        "seconds",
        "iterations",
        "termination",
        "residual",
    ])?;
    let mut weights_table = csv::Writer::from_writer(Vec::new());
    weights_table.write_record(["d", "n", "rep", "asset", "weight"])?;
    let mut worst = EXIT_OK;
    let largest = args.d_list.iter().copied().max().unwrap_or(1);
    let params = random_parameters(largest, args.seed)?;
    for &d in &args.d_list {
        let budgets = BudgetVector::equal(d);
        let model = model_spec(args.model, args.nu, params.leading(d)?)?;
        for &n in &args.n_list {
            for rep in 0..args.reps {
                let sm = model.sample(n, cell_seed(args.seed, d, n, rep))?;
                let start = Instant::now();
                let report = match args.measure {
                    Measure::Es => solve_rb_es(&sm, &budgets, args.alpha, &cfg)?,
                    _ => solve_rb_general(&sm, &budgets, &spec, &cfg)?,
                };
                let seconds = start.elapsed().as_secs_f64();
                let (mu, sigma) = model.gaussian_part();
                let mr = elliptical_marginal_risks(mu, sigma, &report.weights, kappa)?;
                let rc: Vec<f64> = mr.iter().zip(&report.weights).map(|(m, w)| m * w).collect();
                let total: f64 = rc.iter().sum();
                let residual = rc
                    .iter()
                    .map(|r| (r / total - 1.0 / d as f64).abs())
                    .fold(0.0, f64::max);
                table.write_record([
                    d.to_string(),
                    n.to_string(),
                    rep.to_string(),
                    format!("{seconds:.6}"),
                    report.iterations.to_string(),
                    format!("{:?}", report.termination),
                    format!("{residual:e}"),
                ])?;
                for (i, w) in report.weights.iter().enumerate() {
                    weights_table.write_record([
                        d.to_string(),
                        n.to_string(),
                        rep.to_string(),
                        i.to_string(),
                        w.to_string(),
                    ])?;
                }
                worst = worst.max(termination_code(report.termination));
            }
        }
    }
    let text = String::from_utf8(table.into_inner()?)?;
    emit(args.out.as_deref(), &text, stdout)?;
    if let Some(dir) = &args.plot {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("weights.csv"), weights_table.into_inner()?)?;
    }
    Ok(worst)
}
