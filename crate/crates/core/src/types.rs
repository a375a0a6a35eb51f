//! Shared domain types: scenarios, budgets, risk specifications, solver
//! configuration and the solve report.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// `N x d` matrix of per-scenario, per-asset loss factors, stored row-major.
///
/// Entry `(j, i)` is the loss of one unit of exposure to asset `i` in
/// scenario `j`, i.e. `(p_i - P_i^(j)) / p_i`. The portfolio loss in scenario
/// `j` is the inner product of row `j` with the exposure vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMatrix {
    n_scenarios: usize,
    n_assets: usize,
    data: Vec<f64>,
}

impl ScenarioMatrix {
    pub fn new(n_scenarios: usize, n_assets: usize, data: Vec<f64>) -> Result<Self> {
        if n_scenarios == 0 || n_assets == 0 {
            return Err(Error::InvalidInput(format!(
                "scenario matrix must be non-empty, got {n_scenarios}x{n_assets}"
            )));
        }
        if data.len() != n_scenarios * n_assets {
            return Err(Error::DimensionMismatch {
                expected: n_scenarios * n_assets,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite loss factor at scenario {}, asset {}",
                pos / n_assets,
                pos % n_assets
            )));
        }
        Ok(Self {
            n_scenarios,
            n_assets,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_assets = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * n_assets);
        for (j, row) in rows.iter().enumerate() {
            if row.len() != n_assets {
                return Err(Error::Parse {
                    row: j + 1,
                    message: format!("expected {n_assets} columns, found {}", row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), n_assets, data)
    }

    /// Builds a loss matrix from returns, negating every entry.
    pub fn from_returns(n_scenarios: usize, n_assets: usize, returns: Vec<f64>) -> Result<Self> {
        Self::new(
            n_scenarios,
            n_assets,
            returns.into_iter().map(|r| -r).collect(),
        )
    }

    pub fn n_scenarios(&self) -> usize {
        self.n_scenarios
    }

    pub fn n_assets(&self) -> usize {
        self.n_assets
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_assets..(j + 1) * self.n_assets]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n_assets)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.n_assets];
        for row in self.rows() {
            for (m, x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        let n = self.n_scenarios as f64;
        means.iter_mut().for_each(|m| *m /= n);
        means
    }

    /// Returns `c * xi` for every entry.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n_scenarios: self.n_scenarios,
            n_assets: self.n_assets,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    /// Keeps only the listed asset columns, in the given order.
    pub fn select_assets(&self, assets: &[usize]) -> Result<Self> {
        if let Some(&bad) = assets.iter().find(|&&i| i >= self.n_assets) {
            return Err(Error::InvalidInput(format!(
                "asset index {bad} out of range"
            )));
        }
        let mut data = Vec::with_capacity(self.n_scenarios * assets.len());
        for row in self.rows() {
            data.extend(assets.iter().map(|&i| row[i]));
        }
        Self::new(self.n_scenarios, assets.len(), data)
    }

    /// Largest absolute portfolio loss at exposure `v`; used as a natural
    /// scale for tolerances and variable bounds.
    pub fn loss_scale(&self, v: &[f64]) -> f64 {
        let scale = self
            .rows()
            .map(|row| dot(row, v).abs())
            .fold(0.0_f64, f64::max);
        if scale > 0.0 {
            scale
        } else {
            1.0
        }
    }
}

/// Inner product with four running sums, which lets the loop vectorize.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Portfolio loss `l^(j)(v) = xi^(j) . v` for every scenario.
pub fn portfolio_losses(sm: &ScenarioMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != sm.n_assets() {
        return Err(Error::DimensionMismatch {
            expected: sm.n_assets(),
            got: v.len(),
        });
    }
    Ok(sm.rows().map(|row| dot(row, v)).collect())
}

/// Strictly positive risk budgets `B_i`, nominal or proportional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetVector(Vec<f64>);

impl BudgetVector {
    pub fn new(budgets: Vec<f64>) -> Result<Self> {
        if budgets.is_empty() {
            return Err(Error::InvalidInput("budget vector is empty".into()));
        }
        if let Some((i, b)) = budgets
            .iter()
            .enumerate()
            .find(|(_, b)| !(b.is_finite() && **b > 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "budget {i} must be strictly positive and finite, got {b}"
            )));
        }
        Ok(Self(budgets))
    }

    pub fn equal(d: usize) -> Self {
        Self(vec![1.0 / d as f64; d])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Risk appetite `B^dagger = sum_i B_i`.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Proportional budgets `b_i = B_i / B^dagger`, summing to one.
    pub fn proportional(&self) -> Vec<f64> {
        let total = self.total();
        self.0.iter().map(|b| b / total).collect()
    }
}

/// Dollar exposures to each asset; every entry strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Exposure(Vec<f64>);

impl Exposure {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        check_positive(&v)?;
        Ok(Self(v))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn weights(&self) -> Exposure {
        let total: f64 = self.0.iter().sum();
        Exposure(self.0.iter().map(|x| x / total).collect())
    }
}

fn check_positive(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
        Some(index) => Err(Error::NonPositiveExposure {
            index,
            value: v[index],
        }),
        None => Ok(()),
    }
}

/// `w = v / sum(v)`.
pub fn normalize_to_weights(v: &[f64]) -> Result<Vec<f64>> {
    check_positive(v)?;
    Ok(Exposure(v.to_vec()).weights().into_inner())
}

/// Rescales an optimal exposure so that its risk equals the risk appetite.
pub fn scale_to_risk_appetite(v: &[f64], risk_at_v: f64, b_dagger: f64) -> Result<Vec<f64>> {
    if !(b_dagger > 0.0) {
        return Err(Error::InvalidInput(format!(
            "risk appetite must be positive, got {b_dagger}"
        )));
    }
    if !(risk_at_v > 0.0) {
        return Err(Error::Unbounded(risk_at_v));
    }
    let factor = b_dagger / risk_at_v;
    Ok(v.iter().map(|x| factor * x).collect())
}

/// Weight function `gamma` of a distortion risk measure
/// `rho(L) = int_0^1 gamma(u) F_L^{-1}(u) du`.
#[derive(Clone)]
pub enum Distortion {
    /// `gamma = 1`: the expectation.
    Expectation,
    /// `gamma(u) = 1{u > alpha} / (1 - alpha)`.
    ExpectedShortfall { alpha: f64 },
    /// Power distortion `g(x) = x^p` with `0 < p <= 1`, so that
    /// `gamma(u) = p (1 - u)^(p - 1)`. `p = 1/2` is the square-root distortion.
    Power { exponent: f64 },
    /// Piecewise-linear `gamma` through the points `(u_k, gamma_k)`, constant
    /// outside the grid.
    Grid { u: Vec<f64>, gamma: Vec<f64> },
    /// Arbitrary `gamma`, integrated numerically per bucket.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Distortion {
    pub fn sqrt() -> Self {
        Distortion::Power { exponent: 0.5 }
    }

    pub fn grid(u: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if u.len() != gamma.len() || u.len() < 2 {
            return Err(Error::InvalidInput(
                "distortion grid needs at least two (u, gamma) points".into(),
            ));
        }
        if u.windows(2).any(|w| !(w[0] < w[1])) || u[0] < 0.0 || u[u.len() - 1] > 1.0 {
            return Err(Error::InvalidInput(
                "distortion grid abscissae must be strictly increasing within [0, 1]".into(),
            ));
        }
        if gamma.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::InvalidInput(
                "distortion weights must be nonnegative".into(),
            ));
        }
        Ok(Distortion::Grid { u, gamma })
    }
}

impl fmt::Debug for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distortion::Expectation => write!(f, "Expectation"),
            Distortion::ExpectedShortfall { alpha } => write!(f, "ExpectedShortfall({alpha})"),
            Distortion::Power { exponent } => write!(f, "Power({exponent})"),
            Distortion::Grid { u, .. } => write!(f, "Grid({} points)", u.len()),
            Distortion::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Which coherent risk measure to evaluate.
#[derive(Debug, Clone)]
pub enum RiskSpec {
    ExpectedShortfall { alpha: f64 },
    EntropicVaR { alpha: f64 },
    Distortion(Distortion),
}

impl RiskSpec {
    pub fn validate(&self) -> Result<()> {
        let alpha = match self {
            RiskSpec::ExpectedShortfall { alpha }
            | RiskSpec::EntropicVaR { alpha }
            | RiskSpec::Distortion(Distortion::ExpectedShortfall { alpha }) => *alpha,
            RiskSpec::Distortion(Distortion::Power { exponent }) => {
                if !(*exponent > 0.0 && *exponent <= 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "power distortion exponent must lie in (0, 1], got {exponent}"
                    )));
                }
                return Ok(());
            }
            RiskSpec::Distortion(_) => return Ok(()),
        };
        check_alpha(alpha)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "confidence level must lie in [0, 1), got {alpha}"
        )))
    }
}

/// Configuration shared by the cutting-plane solvers.
#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    /// Stopping tolerance on the gap between the evaluated objective and the
    /// master lower bound.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Upper bound `M` on every exposure; `None` means `1000 * d`.
    pub box_bound: Option<f64>,
    /// Lower bound on every exposure inside the master problem.
    pub floor: f64,
    pub rng_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 500,
            box_bound: None,
            floor: 1e-6,
            rng_seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn box_bound_for(&self, d: usize) -> f64 {
        self.box_bound.unwrap_or(1e3 * d as f64)
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let m = self.box_bound_for(d);
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput(
                "max_iterations must be positive".into(),
            ));
        }
        if !(self.floor > 0.0 && self.floor < 1.0 && 1.0 < m) {
            return Err(Error::InvalidInput(format!(
                "exposure bounds must satisfy 0 < floor < 1 < M, got floor {} and M {m}",
                self.floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    IterationLimit,
    BoxBoundActive,
    Unbounded,
}

/// One iteration of a solver: the master lower bound (absent before the first
/// master solve, and for SGD) and the objective evaluated at the trial point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub lower: Option<f64>,
    pub upper: f64,
}

impl TracePoint {
    pub fn gap(&self) -> Option<f64> {
        self.lower.map(|z| self.upper - z)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    /// Normalized weights, summing to one.
    pub weights: Vec<f64>,
    /// Raw optimal exposure before normalization.
    pub exposure: Vec<f64>,
    /// Optimal auxiliary variable at the raw exposure (the sample VaR for
    /// Expected Shortfall, the inner temperature for Entropic VaR).
    pub t_star: Option<f64>,
    /// `t_star` rescaled to the normalized weights.
    pub t_star_weights: Option<f64>,
    /// Risk of the normalized portfolio.
    pub risk: f64,
    /// Risk contributions `w_i * MR_i(w)`.
    pub contributions: Vec<f64>,
    pub iterations: usize,
    pub trace: Vec<TracePoint>,
    pub termination: Termination,
    /// `min_i v_i - floor`; values near zero mean the exposure floor of the
    /// master problem may be binding.
    pub floor_distance: f64,
}

impl SolveReport {
    /// Contributions divided by their sum.
    pub fn normalized_contributions(&self) -> Vec<f64> {
        let total: f64 = self.contributions.iter().sum();
        self.contributions.iter().map(|c| c / total).collect()
    }
}
