//! Cutting planes for any risk measure exposed by [`crate::risk`].
//!
//! From `v = 1`, each iteration evaluates `q = rho(L(v))` with a subgradient
//! `g = sum_j zeta_j xi^(j)`, adds the cut `z >= q + g^T (x - v)` and re-solves
//! the master problem. The master value is a lower bound on the optimum, so
//! the loop stops once `q - z` drops below the tolerance.

use crate::error::{Error, Result};
use crate::master::{Cut, CutStore, MasterMode};
use crate::risk::evaluate;
use crate::types::{
    normalize_to_weights, BudgetVector, RiskSpec, ScenarioMatrix, SolveReport, SolverConfig,
    Termination, TracePoint,
};

/// Risk contributions `RC_i = v_i g_i`, with `g` the subgradient returned by
/// the evaluator at `v`.
pub fn risk_contributions(sm: &ScenarioMatrix, v: &[f64], risk: &RiskSpec) -> Result<Vec<f64>> {
    let e = evaluate(sm, v, risk)?;
    Ok(v.iter().zip(&e.subgradient).map(|(x, g)| x * g).collect())
}

pub(crate) fn check_problem(sm: &ScenarioMatrix, budgets: &BudgetVector) -> Result<()> {
    if budgets.len() != sm.n_assets() {
        return Err(Error::DimensionMismatch {
            expected: sm.n_assets(),
            got: budgets.len(),
        });
    }
    Ok(())
}

/// Assembles a report at the raw exposure `v`: weights, risk and
/// contributions are evaluated at the normalized portfolio.
pub(crate) fn build_report(
    sm: &ScenarioMatrix,
    risk: &RiskSpec,
    v: Vec<f64>,
    trace: Vec<TracePoint>,
    termination: Termination,
    floor: f64,
) -> Result<SolveReport> {
    let weights = normalize_to_weights(&v)?;
    let total: f64 = v.iter().sum();
    let at_v = evaluate(sm, &v, risk)?;
    let at_w = evaluate(sm, &weights, risk)?;
    let contributions = weights
        .iter()
        .zip(&at_w.subgradient)
        .map(|(w, g)| w * g)
        .collect();
    let termination = if matches!(
        termination,
        Termination::Converged | Termination::BoxBoundActive
    ) && !(at_w.value > 0.0)
    {
        Termination::Unbounded
    } else {
        termination
    };
    let floor_distance = v.iter().copied().fold(f64::INFINITY, f64::min) - floor;
    Ok(SolveReport {
        t_star: at_v.t_star,
        t_star_weights: at_v.t_star.map(|t| t / total),
        risk: at_w.value,
        contributions,
        iterations: trace.len(),
        trace,
        termination,
        floor_distance,
        weights,
        exposure: v,
    })
}

/// General cutting-plane solver with a reusable cut store.
pub struct GeneralSolver<'a> {
    sm: &'a ScenarioMatrix,
    risk: RiskSpec,
    cfg: SolverConfig,
    store: CutStore,
}

impl<'a> GeneralSolver<'a> {
    pub fn new(
        sm: &'a ScenarioMatrix,
        budgets: &BudgetVector,
        risk: RiskSpec,
        cfg: SolverConfig,
    ) -> Result<Self> {
        check_problem(sm, budgets)?;
        risk.validate()?;
        let scale = sm.loss_scale(&vec![1.0; sm.n_assets()]);
        let store = CutStore::new(MasterMode::General, budgets, &cfg, scale)?;
        Ok(Self {
            sm,
            risk,
            cfg,
            store,
        })
    }

    pub fn store(&self) -> &CutStore {
        &self.store
    }

    /// Runs the cutting-plane loop from `v = 1`.
    pub fn solve(&mut self) -> Result<SolveReport> {
        let d = self.sm.n_assets();
        if d == 1 {
            return build_report(
                self.sm,
                &self.risk,
                vec![1.0],
                Vec::new(),
                Termination::Converged,
                self.cfg.floor,
            );
        }
        let mut v = vec![1.0; d];
        let mut lower: Option<f64> = None;
        let mut trace = Vec::new();
        let mut termination = Termination::IterationLimit;
        let mut box_active = false;
        for iteration in 1..=self.cfg.max_iterations {
            let e = evaluate(self.sm, &v, &self.risk)?;
            trace.push(TracePoint {
                iteration,
                lower,
                upper: e.value,
            });
            if lower.is_some_and(|z| e.value - z < self.cfg.tolerance) {
                termination = if box_active {
                    Termination::BoxBoundActive
                } else {
                    Termination::Converged
                };
                break;
            }
            self.store
                .add_cut(Cut::from_subgradient(e.value, &e.subgradient, 0.0, &v, 0.0))?;
            let sol = match self.store.solve() {
                Ok(sol) => sol,
                Err(Error::Unbounded(_)) => {
                    termination = Termination::Unbounded;
                    break;
                }
                Err(err) => return Err(err),
            };
            lower = Some(sol.lower_bound);
            box_active = sol.box_active;
            v = sol.v;
        }
        build_report(self.sm, &self.risk, v, trace, termination, self.cfg.floor)
    }

    /// Solves again for new budgets, reusing the objective cuts.
    pub fn resolve(&mut self, budgets: &BudgetVector) -> Result<SolveReport> {
        check_problem(self.sm, budgets)?;
        self.store.set_budgets(budgets)?;
        self.solve()
    }
}

/// Risk-budgeting portfolio for `risk` by general cutting planes.
pub fn solve_rb_general(
    sm: &ScenarioMatrix,
    budgets: &BudgetVector,
    risk: &RiskSpec,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    GeneralSolver::new(sm, budgets, risk.clone(), cfg.clone())?.solve()
}
