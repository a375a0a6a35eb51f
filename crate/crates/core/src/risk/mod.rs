//! Sample evaluators for coherent risk measures and their subgradients.
//!
//! Every evaluator returns a change of probabilities `zeta` over the scenarios
//! with `rho(L) = E_zeta[L]`. By the chain rule through the linear loss,
//! `sum_j zeta_j xi^(j)` is then a subgradient of `v -> rho(L(v))`.

mod distortion;
mod es;
mod evar;
pub mod gaussian;

pub use distortion::{distortion_marginal_risks_mc, distortion_sample, gamma_at};
pub use es::{es_sample, tail_index};
pub use evar::evar_sample;
pub use gaussian::{
    es_gaussian, evar_gaussian, gaussian_marginal_risks, gaussian_portfolio_risk, GaussianKind,
};

use crate::error::Result;
use crate::types::{check_alpha, portfolio_losses, RiskSpec, ScenarioMatrix};

/// Value of a risk measure on a sample of losses.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRisk {
    pub value: f64,
    /// Minimizer of the inner one-dimensional problem, when the measure has
    /// one (VaR for Expected Shortfall, temperature for Entropic VaR).
    pub t_star: Option<f64>,
    /// Scenario weights, nonnegative and summing to one, in input order.
    pub zeta: Vec<f64>,
}

/// Risk of a portfolio together with a subgradient in the exposure.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskEvaluation {
    pub value: f64,
    pub subgradient: Vec<f64>,
    pub zeta: Vec<f64>,
    pub t_star: Option<f64>,
}

/// Evaluates a risk measure on a loss sample.
pub fn sample_risk(losses: &[f64], spec: &RiskSpec) -> Result<SampleRisk> {
    match spec {
        RiskSpec::ExpectedShortfall { alpha } => es_sample(losses, *alpha),
        RiskSpec::EntropicVaR { alpha } => evar_sample(losses, *alpha),
        RiskSpec::Distortion(g) => distortion_sample(losses, g),
    }
}

/// Evaluates `rho(L(v))` on the scenarios together with a subgradient.
pub fn evaluate(sm: &ScenarioMatrix, v: &[f64], spec: &RiskSpec) -> Result<RiskEvaluation> {
    spec.validate()?;
    let losses = portfolio_losses(sm, v)?;
    let sample = sample_risk(&losses, spec)?;
    let subgradient = weighted_rows(sm, &sample.zeta);
    Ok(RiskEvaluation {
        value: sample.value,
        subgradient,
        zeta: sample.zeta,
        t_star: sample.t_star,
    })
}

/// `sum_j zeta_j xi^(j)`.
pub(crate) fn weighted_rows(sm: &ScenarioMatrix, zeta: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; sm.n_assets()];
    for (row, &z) in sm.rows().zip(zeta) {
        if z != 0.0 {
            for (gi, x) in g.iter_mut().zip(row) {
                *gi += z * x;
            }
        }
    }
    g
}

/// Stable ascending order of the losses.
pub(crate) fn ascending_order(losses: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..losses.len()).collect();
    order.sort_by(|&a, &b| losses[a].total_cmp(&losses[b]));
    order
}

/// Spreads the weight of each run of equal losses evenly over the run, so
/// that tied scenarios get the same weight whatever their input order.
pub(crate) fn share_ties(losses: &[f64], order: &[usize], zeta: &mut [f64]) {
    let mut start = 0;
    while start < order.len() {
        let level = losses[order[start]];
        let mut end = start + 1;
        while end < order.len() && losses[order[end]] == level {
            end += 1;
        }
        if end - start > 1 {
            let run = &order[start..end];
            let mean = run.iter().map(|&i| zeta[i]).sum::<f64>() / run.len() as f64;
            run.iter().for_each(|&i| zeta[i] = mean);
        }
        start = end;
    }
}

pub(crate) fn check_sample(losses: &[f64], alpha: Option<f64>) -> Result<()> {
    if losses.is_empty() {
        return Err(crate::Error::InvalidInput("loss sample is empty".into()));
    }
    if losses.iter().any(|l| !l.is_finite()) {
        return Err(crate::Error::InvalidInput(
            "loss sample contains non-finite values".into(),
        ));
    }
    if let Some(a) = alpha {
        check_alpha(a)?;
    }
    Ok(())
}
