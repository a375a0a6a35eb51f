//! Projected stochastic subgradient descent for Expected Shortfall.
//!
//! Each step samples a scenario `xi` (or a mini-batch), takes a subgradient
//! step on `t + (xi . v - t)_+ / (1 - alpha)` in `(v, t)` and projects `v`
//! back onto `{v > 0 : sum_i b_i log v_i >= 0}`. The answer is the running
//! average of the projected iterates, which stays feasible because the set is
//! convex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cp_general::{build_report, check_problem};
use crate::error::{Error, Result};
use crate::scenario::{draw, ScenarioSampler};
use crate::types::{
    check_alpha, dot, BudgetVector, RiskSpec, ScenarioMatrix, SolveReport, Termination, TracePoint,
};

/// Step size `a_k` at iteration `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `a / sqrt(k)`
    InverseSqrt(f64),
    /// `a / (b + k)`
    Inverse(f64, f64),
}

impl StepSchedule {
    pub fn step(&self, k: usize) -> f64 {
        let k = k as f64;
        match *self {
            Self::Constant(a) => a,
            Self::InverseSqrt(a) => a / k.sqrt(),
            Self::Inverse(a, b) => a / (b + k),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Constant(a) | Self::InverseSqrt(a) => a > 0.0 && a.is_finite(),
            Self::Inverse(a, b) => a > 0.0 && a.is_finite() && b > -1.0 && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "step sizes must be positive: {self:?}"
            )))
        }
    }
}

/// Which projected iterates enter the returned average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Every iterate from the first step on.
    #[default]
    All,
    /// Iterates after the first 10% of the steps.
    AfterBurnIn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    pub n_iterations: usize,
    /// `None` selects `InverseSqrt(1 / (d * loss_scale))`.
    pub schedule: Option<StepSchedule>,
    pub batch: usize,
    pub seed: u64,
    pub averaging: Averaging,
    /// Scenarios drawn from a sampler source to evaluate the final report.
    pub evaluation_scenarios: usize,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            n_iterations: 100_000,
            schedule: None,
            batch: 1,
            seed: 0,
            averaging: Averaging::All,
            evaluation_scenarios: 10_000,
        }
    }
}

/// Where scenarios come from.
pub enum SgdSource<'a> {
    /// Uniform draws with replacement from a fixed matrix.
    Saa(&'a ScenarioMatrix),
    /// Fresh independent draws.
    Sampler(&'a mut dyn ScenarioSampler),
}

const PROJECTION_TOL: f64 = 1e-12;

/// `v_i(lambda) = (x_i + sqrt(x_i^2 + 4 lambda b_i)) / 2`, in a form that
/// avoids cancellation for negative `x_i`, and its derivative in `lambda`.
fn kkt_point(x: f64, lb: f64, b: f64) -> (f64, f64) {
    let root = (x * x + 4.0 * lb).sqrt();
    let v = if x >= 0.0 {
        0.5 * (x + root)
    } else {
        2.0 * lb / (root - x)
    };
    (v, b / root)
}

/// Euclidean projection onto `{v > 0 : sum_i b_i log v_i >= 0}`.
///
/// Outside the set the projection satisfies `v_i (v_i - x_i) = lambda b_i` for
/// the `lambda > 0` that puts `v` on the boundary; `lambda` is found by
/// Newton's method in `log lambda`, safeguarded by bisection.
pub fn project_log_simplex(x: &[f64], budgets: &BudgetVector) -> Result<Vec<f64>> {
    if x.len() != budgets.len() {
        return Err(Error::DimensionMismatch {
            expected: budgets.len(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "cannot project a non-finite point".into(),
        ));
    }
    let b = budgets.proportional();
    if x.iter().all(|&v| v > 0.0) && b.iter().zip(x).map(|(bi, v)| bi * v.ln()).sum::<f64>() >= 0.0
    {
        return Ok(x.to_vec());
    }
    // h(s) = sum_i b_i log v_i(e^s) is increasing in s.
    let h = |s: f64| -> (f64, f64) {
        let lambda = s.exp();
        let mut value = 0.0;
        let mut slope = 0.0;
        for (&xi, &bi) in x.iter().zip(&b) {
            let (v, dv) = kkt_point(xi, lambda * bi, bi);
            value += bi * v.ln();
            slope += bi * dv / v;
        }
        (value, slope * lambda)
    };
    let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
    while h(lo).0 > 0.0 {
        lo -= 8.0;
    }
    while h(hi).0 < 0.0 {
        hi += 8.0;
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (value, slope) = h(s);
        if value.abs() <= PROJECTION_TOL {
            break;
        }
        if value < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s - value / slope;
        s = if newton > lo && newton < hi && slope > 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    let lambda = s.exp();
    Ok(x.iter()
        .zip(&b)
        .map(|(&xi, &bi)| kkt_point(xi, lambda * bi, bi).0)
        .collect())
}

enum Draws<'a> {
    Saa(&'a ScenarioMatrix),
    Sampler(&'a mut dyn ScenarioSampler, Vec<f64>),
}

impl Draws<'_> {
    fn next<'s>(&'s mut self, rng: &mut ChaCha8Rng) -> &'s [f64] {
        match self {
            Draws::Saa(sm) => sm.row(rng.random_range(0..sm.n_scenarios())),
            Draws::Sampler(sampler, buf) => {
                sampler.sample_into(buf);
                buf
            }
        }
    }
}

/// Risk-budgeting portfolio for Expected Shortfall by projected SGD.
///
/// The loop runs for exactly `cfg.n_iterations` steps, the only stopping
/// rule, and reports [`Termination::Converged`] when it completes. The report
/// is evaluated on the SAA matrix, or on `cfg.evaluation_scenarios` fresh
/// draws from a sampler. Each trace point holds the mean sampled objective
/// over the preceding window of steps.
pub fn solve_rb_es_sgd(
    source: SgdSource<'_>,
    budgets: &BudgetVector,
    alpha: f64,
    cfg: &SgdConfig,
) -> Result<SolveReport> {
    check_alpha(alpha)?;
    if cfg.n_iterations == 0 || cfg.batch == 0 {
        return Err(Error::InvalidInput(
            "iteration count and batch size must be positive".into(),
        ));
    }
    let d = budgets.len();
    let (mut draws, pilot) = match source {
        SgdSource::Saa(sm) => {
            check_problem(sm, budgets)?;
            (Draws::Saa(sm), None)
        }
        SgdSource::Sampler(sampler) => {
            if sampler.n_assets() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: sampler.n_assets(),
                });
            }
            let pilot = draw(&mut *sampler, cfg.evaluation_scenarios.max(1))?;
            (Draws::Sampler(sampler, vec![0.0; d]), Some(pilot))
        }
    };
    let scale = match (&draws, &pilot) {
        (Draws::Saa(sm), _) => sm.loss_scale(&vec![1.0; d]),
        (_, Some(p)) => p.loss_scale(&vec![1.0; d]),
        _ => 1.0,
    };
    let schedule = cfg
        .schedule
        .unwrap_or(StepSchedule::InverseSqrt(1.0 / (d as f64 * scale)));
    schedule.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tail = 1.0 / (1.0 - alpha);
    let start = match cfg.averaging {
        Averaging::All => 1,
        Averaging::AfterBurnIn => cfg.n_iterations / 10 + 1,
    };
    let window = (cfg.n_iterations / 100).max(1);
    let mut v = vec![1.0; d];
    let mut t = 0.0;
    let mut g_v = vec![0.0; d];
    let mut avg_v = vec![0.0; d];
    let mut avg_count = 0usize;
    let mut trace = Vec::new();
    let mut window_sum = 0.0;
    for k in 1..=cfg.n_iterations {
        g_v.fill(0.0);
        let mut exceed = 0usize;
        let mut objective = 0.0;
        for _ in 0..cfg.batch {
            let xi = draws.next(&mut rng);
            let excess = dot(xi, &v) - t;
            objective += t + tail * excess.max(0.0);
            if excess > 0.0 {
                exceed += 1;
                g_v.iter_mut().zip(xi).for_each(|(g, x)| *g += x);
            }
        }
        let inv_batch = 1.0 / cfg.batch as f64;
        let step = schedule.step(k);
        for (vi, g) in v.iter_mut().zip(&g_v) {
            *vi -= step * tail * g * inv_batch;
        }
        t -= step * (1.0 - tail * exceed as f64 * inv_batch);
        v = project_log_simplex(&v, budgets)?;
        if k >= start {
            avg_count += 1;
            let w = 1.0 / avg_count as f64;
            avg_v
                .iter_mut()
                .zip(&v)
                .for_each(|(a, x)| *a += w * (x - *a));
        }
        window_sum += objective * inv_batch;
        if k % window == 0 || k == cfg.n_iterations {
            let len = (k - 1) % window + 1;
            trace.push(TracePoint {
                iteration: k,
                lower: None,
                upper: window_sum / len as f64,
            });
            window_sum = 0.0;
        }
    }
    let spec = RiskSpec::ExpectedShortfall { alpha };
    let sm = match (&draws, &pilot) {
        (Draws::Saa(sm), _) => *sm,
        (_, Some(p)) => p,
        _ => unreachable!("a sampler source always has an evaluation sample"),
    };
    let mut report = build_report(sm, &spec, avg_v, trace, Termination::Converged, 0.0)?;
    report.iterations = cfg.n_iterations;
    Ok(report)
}
