//! Independent checks of risk-budgeting solutions.
//!
//! [`check_rb_conditions`] measures how far an exposure is from equalizing
//! budget-scaled risk contributions on a scenario sample. The Gaussian oracles
//! compute the risk-budgeting portfolio of a Gaussian loss directly from its
//! mean and covariance, with multipliers obtained numerically rather than from
//! the closed forms used by the solvers.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::risk::{evaluate, GaussianKind};
use crate::types::{BudgetVector, RiskSpec, ScenarioMatrix};

/// Residuals of the risk-budgeting conditions at one exposure.
#[derive(Debug, Clone, PartialEq)]
pub struct RbCheck {
    /// `max_{i,j} |b_i c_j - b_j c_i|` with `b` the proportional budgets and
    /// `c` the contributions divided by their sum.
    pub pairwise: f64,
    /// `|sum_i RC_i - rho| / max(|rho|, 1e-300)`.
    pub euler: f64,
    pub contributions: Vec<f64>,
    pub risk: f64,
    pub passed: bool,
}

/// Checks `b_i RC_j = b_j RC_i` for all pairs and `sum_i RC_i = rho` at `v`.
pub fn check_rb_conditions(
    sm: &ScenarioMatrix,
    v: &[f64],
    budgets: &BudgetVector,
    risk: &RiskSpec,
    tol: f64,
) -> Result<RbCheck> {
    if budgets.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            got: budgets.len(),
        });
    }
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !(**x > 0.0)) {
        return Err(Error::NonPositiveExposure { index, value });
    }
    let e = evaluate(sm, v, risk)?;
    let contributions: Vec<f64> = v.iter().zip(&e.subgradient).map(|(x, g)| x * g).collect();
    let total: f64 = contributions.iter().sum();
    let c: Vec<f64> = contributions.iter().map(|r| r / total).collect();
    let b = budgets.proportional();
    let mut pairwise = 0.0_f64;
    for i in 0..v.len() {
        for j in 0..i {
            pairwise = pairwise.max((b[i] * c[j] - b[j] * c[i]).abs());
        }
    }
    if !pairwise.is_finite() {
        pairwise = f64::INFINITY;
    }
    let euler = (total - e.value).abs() / e.value.abs().max(1e-300);
    Ok(RbCheck {
        pairwise,
        euler,
        passed: pairwise <= tol && euler <= tol,
        contributions,
        risk: e.value,
    })
}

/// `(1 / (1 - alpha)) E[Z; Z > q]` for standard normal `Z`, by composite
/// Simpson quadrature of `z phi(z)` over `[q, q + 40]`.
fn es_kappa_numeric(alpha: f64) -> f64 {
    let q = Normal::standard().inverse_cdf(alpha);
    let n = 20_000;
    let h = 40.0 / n as f64;
    let f = |z: f64| z * (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = f(q) + f(q + 40.0);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(q + k as f64 * h);
    }
    s * h / 3.0 / (1.0 - alpha)
}

/// `inf_{s > 0} (log(1 / (1 - alpha)) + s^2 / 2) / s`, the Entropic VaR of a
/// standard normal, by golden-section search.
fn evar_kappa_numeric(alpha: f64) -> f64 {
    let c = -(1.0 - alpha).ln();
    let f = |s: f64| (c + 0.5 * s * s) / s;
    let (mut a, mut b) = (1e-6, 50.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if f(x1) < f(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    f(0.5 * (a + b))
}

fn kappa(kind: GaussianKind, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!(
            "confidence level must lie in [0, 1), got {alpha}"
        )));
    }
    Ok(match kind {
        GaussianKind::ExpectedShortfall if alpha == 0.0 => 0.0,
        GaussianKind::ExpectedShortfall => es_kappa_numeric(alpha),
        GaussianKind::EntropicVaR => evar_kappa_numeric(alpha),
    })
}

/// Risk and contributions of a Gaussian loss with mean `-mu^T v` and
/// covariance `v^T Sigma v`.
struct GaussianRb<'a> {
    mu: &'a [f64],
    sigma: &'a [f64],
    kappa: f64,
}

impl GaussianRb<'_> {
    fn marginals(&self, v: &[f64]) -> Option<(f64, Vec<f64>)> {
        let d = v.len();
        let sv: Vec<f64> = (0..d)
            .map(|i| (0..d).map(|j| self.sigma[i * d + j] * v[j]).sum())
            .collect();
        let var: f64 = sv.iter().zip(v).map(|(a, b)| a * b).sum();
        if !(var > 0.0) {
            return None;
        }
        let sd = var.sqrt();
        let mr: Vec<f64> = (0..d)
            .map(|i| -self.mu[i] + self.kappa * sv[i] / sd)
            .collect();
        let risk = mr.iter().zip(v).map(|(m, x)| m * x).sum();
        Some((risk, mr))
    }
}

fn check_gaussian(mu: &[f64], sigma: &[f64], budgets: &BudgetVector) -> Result<usize> {
    let d = mu.len();
    if sigma.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            got: sigma.len(),
        });
    }
    if budgets.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: budgets.len(),
        });
    }
    Ok(d)
}

/// Risk-budgeting weights of a two-asset Gaussian loss, by bisection on
/// `RC_1(w) / b_1 - RC_2(w) / b_2` over `w_1 in (0, 1)` to `1e-12`.
pub fn gaussian_rb_bisection(
    mu: &[f64],
    sigma: &[f64],
    budgets: &BudgetVector,
    kind: GaussianKind,
    alpha: f64,
) -> Result<Vec<f64>> {
    if check_gaussian(mu, sigma, budgets)? != 2 {
        return Err(Error::InvalidInput(
            "the bisection oracle needs exactly two assets".into(),
        ));
    }
    let model = GaussianRb {
        mu,
        sigma,
        kappa: kappa(kind, alpha)?,
    };
    let b = budgets.proportional();
    let f = |w1: f64| -> Option<f64> {
        let w = [w1, 1.0 - w1];
        let (_, mr) = model.marginals(&w)?;
        Some(w[0] * mr[0] / b[0] - w[1] * mr[1] / b[1])
    };
    let degenerate =
        || Error::InvalidInput("no sign change on (0, 1); covariance is degenerate".into());
    let (mut lo, mut hi) = (1e-15, 1.0 - 1e-15);
    let (f_lo, f_hi) = (f(lo).ok_or_else(degenerate)?, f(hi).ok_or_else(degenerate)?);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(degenerate());
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid).ok_or_else(degenerate)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w1 = 0.5 * (lo + hi);
    Ok(vec![w1, 1.0 - w1])
}

/// Largest dimension accepted by [`fixed_point_small_d`].
pub const FIXED_POINT_MAX_D: usize = 10;

/// Starting point with every marginal risk positive, where the fixed-point
/// map is defined. Cyclic coordinate minimization of
/// `rho(v) - sum_i b_i log v_i` (convex, minimized at the risk-budgeting
/// exposure) runs from `v = b` until that holds. Each coordinate step solves
/// the one-dimensional stationarity condition by bisection.
fn positive_marginals_start(model: &GaussianRb<'_>, b: &[f64]) -> Option<Vec<f64>> {
    let d = b.len();
    let mut v = b.to_vec();
    for _ in 0..1_000 {
        let (risk, mr) = model.marginals(&v)?;
        if risk > 0.0 && mr.iter().all(|m| *m > 0.0) {
            let total: f64 = v.iter().sum();
            return Some(v.iter().map(|x| x / total).collect());
        }
        for i in 0..d {
            let slope = |x: f64| {
                let mut trial = v.clone();
                trial[i] = x;
                model.marginals(&trial).map(|(_, m)| m[i] - b[i] / x)
            };
            let mut hi = v[i].max(1.0);
            while slope(hi)? <= 0.0 {
                hi *= 2.0;
                if hi > 1e12 {
                    return None;
                }
            }
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if slope(mid)? > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            v[i] = 0.5 * (lo + hi);
        }
    }
    None
}

/// Risk-budgeting weights of a Gaussian loss by the damped fixed-point
/// iteration `v_i <- b_i rho(v) / MR_i(v)`, normalized after every step.
///
/// The damping starts at 0.5 and is halved whenever the residual grows; the
/// iteration stops once the largest relative change is below `1e-10`.
pub fn fixed_point_small_d(
    mu: &[f64],
    sigma: &[f64],
    budgets: &BudgetVector,
    kind: GaussianKind,
    alpha: f64,
) -> Result<Vec<f64>> {
    let d = check_gaussian(mu, sigma, budgets)?;
    if d > FIXED_POINT_MAX_D {
        return Err(Error::InvalidInput(format!(
            "the fixed-point oracle handles at most {FIXED_POINT_MAX_D} assets, got {d}"
        )));
    }
    let model = GaussianRb {
        mu,
        sigma,
        kappa: kappa(kind, alpha)?,
    };
    let b = budgets.proportional();
    let diverged = |iterations| Error::NoConvergence {
        what: "fixed-point oracle",
        iterations,
    };
    let mut w = positive_marginals_start(&model, &b).ok_or_else(|| diverged(0))?;
    let mut damping = 0.5;
    let mut last_change = f64::INFINITY;
    for iteration in 1..=1_000_000 {
        let (risk, mr) = model.marginals(&w).ok_or_else(|| diverged(iteration))?;
        if !(risk > 0.0) || mr.iter().any(|m| !(*m > 0.0)) {
            return Err(diverged(iteration));
        }
        let target: Vec<f64> = (0..d).map(|i| b[i] * risk / mr[i]).collect();
        let total: f64 = target.iter().sum();
        let change = (0..d)
            .map(|i| (target[i] / total - w[i]).abs() / w[i])
            .fold(0.0, f64::max);
        if change < 1e-10 {
            return Ok(target.iter().map(|x| x / total).collect());
        }
        if change > last_change {
            damping *= 0.5;
            if damping < 1e-8 {
                return Err(diverged(iteration));
            }
        }
        last_change = change;
        let next: Vec<f64> = (0..d)
            .map(|i| (1.0 - damping) * w[i] + damping * target[i] / total)
            .collect();
        let s: f64 = next.iter().sum();
        w = next.into_iter().map(|x| x / s).collect();
    }
    Err(diverged(1_000_000))
}
