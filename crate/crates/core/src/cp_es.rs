//! Cutting planes for Expected Shortfall on the Rockafellar-Uryasev form
//!
//! ```text
//! min_{v, t}  t + Q(v, t),   Q(v, t) = 1/(N (1 - alpha)) sum_j (xi^(j) . v - t)_+
//! s.t.        sum_i b_i log v_i >= 0
//! ```
//!
//! `Q` is a sum of scenario terms, each with the explicit subgradient
//! `(xi^(j), -1) / (N (1 - alpha))` when the scenario exceeds `t`. The master
//! works in `(v, t, z)` with `z` modelling `Q`.

use crate::cp_general::{build_report, check_problem};
use crate::error::Result;
use crate::master::{Cut, CutStore, MasterMode};
use crate::types::{
    check_alpha, dot, BudgetVector, RiskSpec, ScenarioMatrix, SolveReport, SolverConfig,
    Termination, TracePoint,
};

/// Value and subgradient of the second-stage function `Q` at `(v, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondStage {
    pub q: f64,
    pub g_v: Vec<f64>,
    pub g_t: f64,
}

/// Evaluates `Q(v, t)` scenario by scenario. Scenarios with a loss exactly
/// equal to `t` contribute nothing to the subgradient.
pub fn evaluate_q(sm: &ScenarioMatrix, v: &[f64], t: f64, alpha: f64) -> Result<SecondStage> {
    check_alpha(alpha)?;
    if v.len() != sm.n_assets() {
        return Err(crate::Error::DimensionMismatch {
            expected: sm.n_assets(),
            got: v.len(),
        });
    }
    let w = 1.0 / (sm.n_scenarios() as f64 * (1.0 - alpha));
    let mut q = 0.0;
    let mut g_v = vec![0.0; sm.n_assets()];
    let mut exceed = 0usize;
    for row in sm.rows() {
        let excess = dot(row, v) - t;
        if excess > 0.0 {
            q += excess;
            exceed += 1;
            for (g, x) in g_v.iter_mut().zip(row) {
                *g += x;
            }
        }
    }
    g_v.iter_mut().for_each(|g| *g *= w);
    Ok(SecondStage {
        q: q * w,
        g_v,
        g_t: -(exceed as f64) * w,
    })
}

/// Expected Shortfall cutting-plane solver with a reusable cut store.
pub struct EsSolver<'a> {
    sm: &'a ScenarioMatrix,
    alpha: f64,
    cfg: SolverConfig,
    store: CutStore,
}

impl<'a> EsSolver<'a> {
    pub fn new(
        sm: &'a ScenarioMatrix,
        budgets: &BudgetVector,
        alpha: f64,
        cfg: SolverConfig,
    ) -> Result<Self> {
        check_problem(sm, budgets)?;
        check_alpha(alpha)?;
        let scale = sm.loss_scale(&vec![1.0; sm.n_assets()]);
        let store = CutStore::new(MasterMode::ExpectedShortfall, budgets, &cfg, scale)?;
        Ok(Self {
            sm,
            alpha,
            cfg,
            store,
        })
    }

    pub fn store(&self) -> &CutStore {
        &self.store
    }

    fn spec(&self) -> RiskSpec {
        RiskSpec::ExpectedShortfall { alpha: self.alpha }
    }

    /// Runs the cutting-plane loop from `v = 1`, `t = 0`.
    pub fn solve(&mut self) -> Result<SolveReport> {
        let d = self.sm.n_assets();
        let spec = self.spec();
        if d == 1 {
            return build_report(
                self.sm,
                &spec,
                vec![1.0],
                Vec::new(),
                Termination::Converged,
                self.cfg.floor,
            );
        }
        let mut v = vec![1.0; d];
        let mut t = 0.0;
        let mut lower: Option<f64> = None;
        let mut trace = Vec::new();
        let mut termination = Termination::IterationLimit;
        let mut box_active = false;
        let mut t_bound_active = false;
        for iteration in 1..=self.cfg.max_iterations {
            let s = evaluate_q(self.sm, &v, t, self.alpha)?;
            let upper = t + s.q;
            trace.push(TracePoint {
                iteration,
                lower,
                upper,
            });
            self.store
                .add_cut(Cut::from_subgradient(s.q, &s.g_v, s.g_t, &v, t))?;
            if lower.is_some_and(|z| upper - z < self.cfg.tolerance) {
                if t_bound_active {
                    // The artificial bound on t may be cutting off the optimum.
                    self.store.set_t_bound(2.0 * self.store.t_bound())?;
                } else {
                    termination = if box_active {
                        Termination::BoxBoundActive
                    } else {
                        Termination::Converged
                    };
                    break;
                }
            }
            let sol = self.store.solve()?;
            lower = Some(sol.lower_bound);
            box_active = sol.box_active;
            t_bound_active = sol.t_bound_active;
            v = sol.v;
            t = sol.t.unwrap_or(0.0);
        }
        build_report(self.sm, &spec, v, trace, termination, self.cfg.floor)
    }

    /// Solves again for new budgets, reusing the objective cuts.
    pub fn resolve(&mut self, budgets: &BudgetVector) -> Result<SolveReport> {
        check_problem(self.sm, budgets)?;
        self.store.set_budgets(budgets)?;
        self.solve()
    }
}

/// Risk-budgeting portfolio for Expected Shortfall at level `alpha`.
///
/// The report's `t_star` is the sample VaR of the losses at the raw optimal
/// exposure (a minimizer in `t`); `t_star_weights` is the same quantity for
/// the normalized weights.
pub fn solve_rb_es(
    sm: &ScenarioMatrix,
    budgets: &BudgetVector,
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    EsSolver::new(sm, budgets, alpha, cfg.clone())?.solve()
}
