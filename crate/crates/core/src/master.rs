//! First-stage problem shared by the cutting-plane solvers.
//!
//! ```text
//! min  z            (general mode)      min  t + z        (Expected Shortfall mode)
//! s.t. z >= c_k + pi_k^T v [+ pi_t,k t]   for every objective cut k
//!      sum_i b_i log v_i >= 0
//!      floor <= v_i <= M,   -T <= t <= T,   z >= 0 (ES mode)
//! ```
//!
//! The problem is linear apart from the log constraint, which is kept exact:
//! it is solved by a primal log-barrier method with Newton steps. The barrier
//! Hessian is diagonal plus one rank-one term per cut, which the Newton solve
//! exploits when cuts are few next to the dimension. The barrier weight `tau`
//! grows, once per centered stage, until the suboptimality bound, about
//! `m / tau` for `m` barrier terms, is below [`GAP_TOL`] relative to the
//! objective; the objective minus that bound is reported as a lower bound.
//!
//! Each solve starts from the previous solution lifted into the interior;
//! `z` can always be raised until every cut is slack. Budgets are used in
//! proportional form, so scaling them leaves every solve unchanged.

use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::{spd_back, spd_factor, Lu};
use crate::types::{dot, BudgetVector, SolverConfig};

/// Relative duality-gap bound at which the barrier method stops.
pub const GAP_TOL: f64 = 1e-10;
const TAU_GROWTH: f64 = 20.0;
const MAX_STAGES: usize = 80;
/// Newton steps allowed across all stages. A stage that fails to center keeps
/// its tau, so long walks across a wide box still finish.
const MAX_NEWTON_TOTAL: usize = 20_000;
/// Centering stops once half the squared Newton decrement is below this.
const NEWTON_TOL: f64 = 1e-6;

/// Objective cut `z >= intercept + coef_v^T v + coef_t t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub intercept: f64,
    pub coef_v: Vec<f64>,
    pub coef_t: f64,
}

impl Cut {
    /// Cut through `(v0, t0)` with value `q` and subgradient `(g_v, g_t)`.
    pub fn from_subgradient(q: f64, g_v: &[f64], g_t: f64, v0: &[f64], t0: f64) -> Self {
        let intercept = q - g_v.iter().zip(v0).map(|(g, v)| g * v).sum::<f64>() - g_t * t0;
        Self {
            intercept,
            coef_v: g_v.to_vec(),
            coef_t: g_t,
        }
    }

    pub fn value(&self, v: &[f64], t: f64) -> f64 {
        self.intercept + dot(&self.coef_v, v) + self.coef_t * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MasterMode {
    /// Variables `(v, z)`, objective `z`.
    General,
    /// Variables `(v, t, z)`, objective `t + z`, with `z >= 0`.
    ExpectedShortfall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterSolution {
    pub v: Vec<f64>,
    /// Present in Expected Shortfall mode.
    pub t: Option<f64>,
    pub z: f64,
    /// Objective at the returned point.
    pub objective: f64,
    /// `objective` minus the duality-gap bound; never above the optimum.
    pub lower_bound: f64,
    /// Some `v_i` rests on the upper box bound.
    pub box_active: bool,
    /// `t` rests on one of its artificial bounds.
    pub t_bound_active: bool,
    /// `sum_i b_i log v_i`, nonnegative.
    pub log_value: f64,
}

/// Accumulated objective cuts and the data of the first-stage problem.
#[derive(Debug, Clone)]
pub struct CutStore {
    mode: MasterMode,
    d: usize,
    budgets: Vec<f64>,
    floor: f64,
    box_bound: f64,
    t_bound: f64,
    objective_cuts: Vec<Cut>,
    /// Last solution in `(v, t)`, the next starting point.
    last: Option<Vec<f64>>,
}

impl CutStore {
    /// `loss_scale` sets the artificial bound `T = 10 loss_scale` on `t`.
    pub fn new(
        mode: MasterMode,
        budgets: &BudgetVector,
        cfg: &SolverConfig,
        loss_scale: f64,
    ) -> Result<Self> {
        let d = budgets.len();
        cfg.validate(d)?;
        let scale = if loss_scale.is_finite() && loss_scale > 0.0 {
            loss_scale
        } else {
            1.0
        };
        Ok(Self {
            mode,
            d,
            budgets: budgets.proportional(),
            floor: cfg.floor,
            box_bound: cfg.box_bound_for(d),
            t_bound: 10.0 * scale,
            objective_cuts: Vec::new(),
            last: None,
        })
    }

    pub fn mode(&self) -> MasterMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn objective_cuts(&self) -> &[Cut] {
        &self.objective_cuts
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn box_bound(&self) -> f64 {
        self.box_bound
    }

    pub fn t_bound(&self) -> f64 {
        self.t_bound
    }

    fn has_t(&self) -> bool {
        self.mode == MasterMode::ExpectedShortfall
    }

    fn n_vars(&self) -> usize {
        if self.has_t() {
            self.d + 2
        } else {
            self.d + 1
        }
    }

    fn z_index(&self) -> usize {
        self.n_vars() - 1
    }

    fn n_barrier_terms(&self) -> usize {
        let extra = if self.has_t() { 3 } else { 0 };
        self.objective_cuts.len() + 2 * self.d + 1 + extra
    }

    /// Appends an objective cut. Cuts must not involve `t` in general mode.
    pub fn add_cut(&mut self, cut: Cut) -> Result<()> {
        if cut.coef_v.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: cut.coef_v.len(),
            });
        }
        if !cut.intercept.is_finite()
            || !cut.coef_t.is_finite()
            || cut.coef_v.iter().any(|c| !c.is_finite())
        {
            return Err(Error::InvalidInput(
                "cut coefficients must be finite".into(),
            ));
        }
        if !self.has_t() && cut.coef_t != 0.0 {
            return Err(Error::InvalidInput(
                "general-mode cuts cannot involve t".into(),
            ));
        }
        self.objective_cuts.push(cut);
        Ok(())
    }

    /// Replaces the budgets; objective cuts are kept.
    pub fn set_budgets(&mut self, budgets: &BudgetVector) -> Result<()> {
        if budgets.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: budgets.len(),
            });
        }
        self.budgets = budgets.proportional();
        Ok(())
    }

    /// Widens the artificial bound on `t`.
    pub fn set_t_bound(&mut self, t_bound: f64) -> Result<()> {
        if !(t_bound > 0.0 && t_bound.is_finite()) {
            return Err(Error::InvalidInput(format!("bad bound on t: {t_bound}")));
        }
        self.t_bound = t_bound;
        Ok(())
    }

    fn log_value(&self, v: &[f64]) -> f64 {
        self.budgets.iter().zip(v).map(|(b, x)| b * x.ln()).sum()
    }

    fn cut_slack(&self, cut: &Cut, x: &[f64]) -> f64 {
        let t = if self.has_t() { x[self.d] } else { 0.0 };
        x[self.z_index()] - cut.value(&x[..self.d], t)
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let z = x[self.z_index()];
        if self.has_t() {
            x[self.d] + z
        } else {
            z
        }
    }

    /// Slacks of every barrier term except the exposure box.
    fn other_slacks(&self, x: &[f64]) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.n_barrier_terms() - 2 * self.d);
        if self.has_t() {
            let t = x[self.d];
            s.push(t + self.t_bound);
            s.push(self.t_bound - t);
            s.push(x[self.z_index()]);
        }
        s.extend(self.objective_cuts.iter().map(|c| self.cut_slack(c, x)));
        s.push(self.log_value(&x[..self.d]));
        s
    }

    /// `-sum log(slack)`, or `None` outside the interior.
    fn barrier(&self, x: &[f64]) -> Option<f64> {
        let d = self.d;
        let mut total = 0.0;
        // The box slacks of four assets share one logarithm; their product
        // stays far inside the floating-point range.
        for chunk in x[..d].chunks(4) {
            let mut product = 1.0;
            for &v in chunk {
                let (lo, hi) = (v - self.floor, self.box_bound - v);
                if !(lo > 0.0 && hi > 0.0) {
                    return None;
                }
                product *= lo * hi;
            }
            total -= if product.is_normal() {
                product.ln()
            } else {
                chunk
                    .iter()
                    .map(|&v| (v - self.floor).ln() + (self.box_bound - v).ln())
                    .sum()
            };
        }
        for s in self.other_slacks(x) {
            if !(s > 0.0) {
                return None;
            }
            total -= s.ln();
        }
        Some(total)
    }

    /// Gradient and Hessian of the barrier at `x`.
    fn curvature(&self, x: &[f64]) -> Curvature {
        let n = self.n_vars();
        let d = self.d;
        let zi = self.z_index();
        let mut grad = vec![0.0; n];
        let mut diag = vec![0.0; n];
        for i in 0..d {
            let (lo, hi) = (x[i] - self.floor, self.box_bound - x[i]);
            grad[i] = -1.0 / lo + 1.0 / hi;
            diag[i] = 1.0 / (lo * lo) + 1.0 / (hi * hi);
        }
        if self.has_t() {
            let (lo, hi) = (x[d] + self.t_bound, self.t_bound - x[d]);
            grad[d] = -1.0 / lo + 1.0 / hi;
            diag[d] = 1.0 / (lo * lo) + 1.0 / (hi * hi);
            grad[zi] = -1.0 / x[zi];
            diag[zi] = 1.0 / (x[zi] * x[zi]);
        }
        let mut cols = Vec::with_capacity((self.objective_cuts.len() + 1) * n);
        // Cut slack r = a^T x - c with a = (-pi_v, -pi_t, 1); the term
        // -log r contributes the column a / r.
        for cut in &self.objective_cuts {
            let inv = 1.0 / self.cut_slack(cut, x);
            let start = cols.len();
            cols.extend(cut.coef_v.iter().map(|c| -c * inv));
            if self.has_t() {
                cols.push(-cut.coef_t * inv);
            }
            cols.push(inv);
            for (g, u) in grad.iter_mut().zip(&cols[start..]) {
                *g -= u;
            }
        }
        // -log h with h = sum_i b_i log v_i.
        let h = self.log_value(&x[..d]);
        let start = cols.len();
        cols.resize(start + n, 0.0);
        for i in 0..d {
            let dh = self.budgets[i] / x[i];
            grad[i] -= dh / h;
            diag[i] += dh / (x[i] * h);
            cols[start + i] = dh / h;
        }
        Curvature {
            n,
            d,
            grad,
            diag,
            cols,
        }
    }

    fn objective_gradient(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n_vars()];
        c[self.z_index()] = 1.0;
        if self.has_t() {
            c[self.d] = 1.0;
        }
        c
    }

    /// Strictly feasible point near the previous solution.
    fn start(&self) -> Vec<f64> {
        let d = self.d;
        let (lo, hi) = (self.floor, self.box_bound);
        let inner = |v: f64| v.clamp(lo + 1e-6 * (hi - lo).min(1.0), hi * (1.0 - 1e-4));
        let default_v = vec![inner(2.0_f64.min(0.5 * (1.0 + hi))); d];
        let mut v: Vec<f64> = match &self.last {
            Some(p) => p[..d].iter().map(|&x| inner(x)).collect(),
            None => default_v.clone(),
        };
        let lift = (1e-3 - self.log_value(&v)).max(0.0).exp();
        v.iter_mut().for_each(|x| *x = inner(*x * lift));
        if !(self.log_value(&v) > 0.0) {
            v = default_v;
        }
        let mut x = v;
        if self.has_t() {
            let t = self.last.as_ref().map_or(0.0, |p| p[d]);
            x.push(t.clamp(-0.999 * self.t_bound, 0.999 * self.t_bound));
        }
        let t = if self.has_t() { x[d] } else { 0.0 };
        let top = self
            .objective_cuts
            .iter()
            .map(|c| c.value(&x[..d], t))
            .fold(f64::NEG_INFINITY, f64::max);
        let base = if self.has_t() { top.max(0.0) } else { top };
        x.push(base + 1e-2 * base.abs().max(1.0));
        x
    }

    /// Solves the first-stage problem.
    pub fn solve(&mut self) -> Result<MasterSolution> {
        if self.objective_cuts.is_empty() && !self.has_t() {
            return Err(Error::InvalidInput(
                "the master problem needs at least one objective cut".into(),
            ));
        }
        let n = self.n_vars();
        let m = self.n_barrier_terms() as f64;
        let c = self.objective_gradient();
        let mut x = self.start();
        let mut barrier = self.barrier(&x).ok_or(Error::Infeasible)?;
        let mut tau = m / self.objective(&x).abs().max(1.0);
        let mut rhs = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut stage = 1;
        let mut newton = 0;
        loop {
            let curv = self.curvature(&x);
            for j in 0..n {
                rhs[j] = -(tau * c[j] + curv.grad[j]);
            }
            let step = curv.solve(&rhs).ok_or(Error::NoConvergence {
                what: "master Newton system",
                iterations: newton,
            })?;
            let decrement: f64 = rhs.iter().zip(&step).map(|(r, s)| r * s).sum();
            let lambda = decrement.max(0.0).sqrt();
            // Below this decrease the line search only sees rounding noise.
            let noise = 64.0 * f64::EPSILON * (tau * dot(&c, &x).abs() + barrier.abs());
            let mut stalled = decrement / 2.0 > NEWTON_TOL && decrement <= noise;
            if stalled && lambda >= 0.5 {
                break;
            }
            if decrement / 2.0 > NEWTON_TOL && !stalled {
                newton += 1;
                if newton > MAX_NEWTON_TOTAL {
                    break;
                }
                let linear: f64 = tau * dot(&c, &step);
                let mut s = 1.0;
                let mut accepted = false;
                for _ in 0..60 {
                    for j in 0..n {
                        trial[j] = x[j] + s * step[j];
                    }
                    if let Some(b) = self.barrier(&trial) {
                        if s * linear + (b - barrier) <= -0.25 * s * decrement {
                            barrier = b;
                            accepted = true;
                            break;
                        }
                    }
                    s *= 0.5;
                }
                if accepted && trial.iter().zip(&x).any(|(a, b)| a != b) {
                    std::mem::swap(&mut x, &mut trial);
                    continue;
                }
                // The step no longer changes x in floating point. The point is
                // returned if it is close enough to the path for the gap bound
                // to hold; a larger tau cannot do better.
                if lambda >= 0.5 {
                    break;
                }
                stalled = true;
            }
            let objective = self.objective(&x);
            // Suboptimality bound for an approximately centered point.
            let gap = (m + (lambda + m.sqrt()) * lambda / (1.0 - lambda)) / tau;
            if stalled || gap <= GAP_TOL * objective.abs().max(1.0) {
                return Ok(self.finish(x, objective, gap));
            }
            if stage == MAX_STAGES {
                break;
            }
            stage += 1;
            tau *= TAU_GROWTH;
        }
        Err(Error::NoConvergence {
            what: "master barrier method",
            iterations: newton,
        })
    }

    fn finish(&mut self, x: Vec<f64>, objective: f64, gap: f64) -> MasterSolution {
        let d = self.d;
        let v = x[..d].to_vec();
        let t = self.has_t().then(|| x[d]);
        let box_active = v.iter().any(|&vi| vi >= self.box_bound * (1.0 - 1e-6));
        let t_bound_active = t.is_some_and(|t| t.abs() >= self.t_bound * (1.0 - 1e-6));
        let log_value = self.log_value(&v);
        self.last = Some(x[..self.z_index()].to_vec());
        MasterSolution {
            v,
            t,
            z: x[self.z_index()],
            objective,
            lower_bound: objective - gap,
            box_active,
            t_bound_active,
            log_value,
        }
    }

    /// Writes the current problem, one constraint per line:
    ///
    /// ```text
    /// minimize: +1e0 t +1e0 z
    /// cut 0: -5e-1 v1 -5e-1 v2 +2e0 t +1e0 z >= 0e0
    /// log: +5e-1 log(v1) +5e-1 log(v2) >= 0
    /// bound: 1e-6 <= v1 <= 2e3
    /// ```
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.n_vars();
        let d = self.d;
        let names: Vec<String> = (0..n)
            .map(|j| {
                if j == self.z_index() {
                    "z".to_string()
                } else if j == d {
                    "t".to_string()
                } else {
                    format!("v{}", j + 1)
                }
            })
            .collect();
        let linear = |row: &[f64]| {
            row.iter()
                .zip(&names)
                .filter(|(c, _)| **c != 0.0)
                .map(|(c, n)| format!("{c:+e} {n}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(w, "minimize: {}", linear(&self.objective_gradient()))?;
        for (k, cut) in self.objective_cuts.iter().enumerate() {
            let mut row: Vec<f64> = cut.coef_v.iter().map(|c| -c).collect();
            if self.has_t() {
                row.push(-cut.coef_t);
            }
            row.push(1.0);
            writeln!(w, "cut {k}: {} >= {:e}", linear(&row), cut.intercept)?;
        }
        let log_terms: Vec<String> = self
            .budgets
            .iter()
            .enumerate()
            .map(|(i, b)| format!("{b:+e} log(v{})", i + 1))
            .collect();
        writeln!(w, "log: {} >= 0", log_terms.join(" "))?;
        for name in &names[..d] {
            writeln!(
                w,
                "bound: {:e} <= {name} <= {:e}",
                self.floor, self.box_bound
            )?;
        }
        if self.has_t() {
            writeln!(w, "bound: {:e} <= t <= {:e}", -self.t_bound, self.t_bound)?;
            writeln!(w, "bound: 0e0 <= z")?;
        }
        Ok(())
    }
}

/// Barrier Hessian in the form `diag(diag) + sum_k u_k u_k^T`.
struct Curvature {
    n: usize,
    d: usize,
    grad: Vec<f64>,
    diag: Vec<f64>,
    /// The vectors `u_k`, each of length `n`, back to back.
    cols: Vec<f64>,
}

impl Curvature {
    fn rank(&self) -> usize {
        self.cols.len() / self.n
    }

    fn col(&self, k: usize) -> &[f64] {
        &self.cols[k * self.n..(k + 1) * self.n]
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.diag.iter().zip(x).map(|(a, b)| a * b).collect();
        for k in 0..self.rank() {
            let u = self.col(k);
            let ux: f64 = u.iter().zip(x).map(|(a, b)| a * b).sum();
            out.iter_mut().zip(u).for_each(|(o, a)| *o += a * ux);
        }
        out
    }

    /// Solves `H x = rhs`. When the rank is small next to `d` the low-rank
    /// factorization is tried first, with a few rounds of iterative
    /// refinement; the dense factorization is the fallback.
    fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        if self.rank() < self.d / 2 {
            if let Some(f) = LowRankFactor::new(self) {
                let scale = rhs.iter().fold(0.0_f64, |m, b| m.max(b.abs()));
                let mut x = f.solve(rhs);
                for _ in 0..4 {
                    let r: Vec<f64> = rhs.iter().zip(self.apply(&x)).map(|(a, b)| a - b).collect();
                    if r.iter().fold(0.0_f64, |m, v| m.max(v.abs())) <= 1e-10 * scale {
                        return Some(x);
                    }
                    x.iter_mut().zip(f.solve(&r)).for_each(|(a, b)| *a += b);
                }
            }
        }
        self.solve_dense(rhs)
    }

    /// Dense lower triangle of `H + ridge I`.
    fn dense(&self, ridge: f64) -> Vec<f64> {
        let n = self.n;
        let mut hess = vec![0.0; n * n];
        for (j, dj) in self.diag.iter().enumerate() {
            hess[j * n + j] = dj + ridge;
        }
        for k in 0..self.rank() {
            let u = self.col(k);
            for j in 0..n {
                if u[j] != 0.0 {
                    for (h, uk) in hess[j * n..=j * n + j].iter_mut().zip(u) {
                        *h += u[j] * uk;
                    }
                }
            }
        }
        hess
    }

    fn solve_dense(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let mut hess = self.dense(0.0);
        let n = self.n;
        let largest = (0..n).map(|j| hess[j * n + j]).fold(0.0_f64, f64::max);
        let mut x = rhs.to_vec();
        if spd_factor(&mut hess, n) {
            spd_back(&hess, n, &mut x);
            return Some(x);
        }
        // Numerically singular: retry with a tiny ridge.
        let mut hess = self.dense(1e-12 * largest);
        spd_factor(&mut hess, n).then(|| {
            spd_back(&hess, n, &mut x);
            x
        })
    }
}

/// Low-rank solve of `H x = rhs` with `H = D + U U^T`. With `y = U^T x` and
/// `x_v = D_v^-1 (rhs_v - U_v y)` eliminated, the remaining unknowns `(y, x_s)`
/// satisfy a small system in the cut multipliers and the one or two
/// coordinates outside `v`, solved by LU with partial pivoting.
struct LowRankFactor<'a> {
    h: &'a Curvature,
    /// Columns `D_v^-1 u_k,v`.
    scaled: Vec<Vec<f64>>,
    /// Row and column scaling of the small system.
    equil: Vec<f64>,
    lu: Lu,
}

impl<'a> LowRankFactor<'a> {
    fn new(h: &'a Curvature) -> Option<Self> {
        let (n, d, r) = (h.n, h.d, h.rank());
        let ns = n - d;
        let size = r + ns;
        let dv = &h.diag[..d];
        let scaled: Vec<Vec<f64>> = (0..r)
            .map(|k| h.col(k)[..d].iter().zip(dv).map(|(u, w)| u / w).collect())
            .collect();
        let mut kkt = vec![0.0; size * size];
        for k in 0..r {
            let uk = h.col(k);
            for l in 0..=k {
                let g = -dot(&uk[..d], &scaled[l]);
                kkt[k * size + l] = g;
                kkt[l * size + k] = g;
            }
            kkt[k * size + k] -= 1.0;
            for a in 0..ns {
                kkt[k * size + r + a] = uk[d + a];
                kkt[(r + a) * size + k] = uk[d + a];
            }
        }
        for a in 0..ns {
            kkt[(r + a) * size + r + a] = h.diag[d + a];
        }
        // Symmetric equilibration: entries of the scaled matrix are at most 1.
        let equil: Vec<f64> = kkt
            .chunks_exact(size)
            .map(|row| 1.0 / row.iter().fold(0.0_f64, |m, x| m.max(x.abs())).sqrt())
            .collect();
        if equil.iter().any(|e| !e.is_finite()) {
            return None;
        }
        for (i, row) in kkt.chunks_exact_mut(size).enumerate() {
            row.iter_mut()
                .zip(&equil)
                .for_each(|(x, ej)| *x *= equil[i] * ej);
        }
        let lu = Lu::factor(kkt, size)?;
        Some(Self {
            h,
            scaled,
            equil,
            lu,
        })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let d = self.h.d;
        let r = self.scaled.len();
        let dv = &self.h.diag[..d];
        let mut sys: Vec<f64> = self.scaled.iter().map(|s| -dot(s, &rhs[..d])).collect();
        sys.extend_from_slice(&rhs[d..]);
        sys.iter_mut().zip(&self.equil).for_each(|(x, e)| *x *= e);
        self.lu.solve(&mut sys);
        sys.iter_mut().zip(&self.equil).for_each(|(x, e)| *x *= e);
        let mut x: Vec<f64> = rhs[..d].iter().zip(dv).map(|(a, w)| a / w).collect();
        for (s, yk) in self.scaled.iter().zip(&sys[..r]) {
            x.iter_mut().zip(s).for_each(|(o, a)| *o -= a * yk);
        }
        x.extend_from_slice(&sys[r..]);
        x
    }
}
