//! Risk-budgeting portfolios for coherent risk measures.
//!
//! Portfolios are computed from a matrix of loss scenarios. Three solvers are
//! provided:
//!
//! * [`cp_es::solve_rb_es`]: cutting planes on the Rockafellar-Uryasev
//!   two-stage form of Expected Shortfall, decomposed by scenario.
//! * [`cp_general::solve_rb_general`]: cutting planes on any measure exposed by
//!   [`risk`] (Expected Shortfall, Entropic VaR, distortion measures).
//! * [`sgd::solve_rb_es_sgd`]: projected stochastic subgradient descent for
//!   Expected Shortfall.
//!
//! All of them solve `min rho(L(v))` subject to `sum_i b_i log v_i >= 0` and
//! report normalized weights together with per-asset risk contributions.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cp_es;
pub mod cp_general;
pub mod error;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod master;
pub mod risk;
pub mod scenario;
pub mod sgd;
pub mod types;
pub mod verification;

pub use error::{Error, Result};
pub use types::{
    normalize_to_weights, portfolio_losses, scale_to_risk_appetite, BudgetVector, Exposure,
    RiskSpec, ScenarioMatrix, SolveReport, SolverConfig, Termination, TracePoint,
};
