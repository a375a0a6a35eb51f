//! Dense bounded-variable simplex for small LPs of the form
//!
//! ```text
//! min c^T x   s.t.   A x >= b,   lo <= x <= hi
//! ```
//!
//! The solver keeps a dictionary with one column per nonbasic variable, so its
//! width stays equal to the number of structural variables no matter how many
//! rows are added. Rows can be appended to a solved instance and the next call
//! to [`DualSimplex::solve`] continues from the previous basis.
//!
//! The initial basis is all slacks with every structural variable at the bound
//! favoured by its cost, which is dual feasible. Infinite bounds in the
//! direction of descent are replaced by artificial bounds at `+-ARTIFICIAL_BOUND`;
//! a solution resting on one of them is reported as unbounded. A primal phase
//! cleans up any dual infeasibility left by round-off.

use crate::error::{Error, Result};
use crate::linalg::Lu;

const ARTIFICIAL_BOUND: f64 = 1e9;
const PRIMAL_TOL: f64 = 1e-13;
const DUAL_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_BEFORE_BLAND: usize = 100;

/// An LP in the form `min c^T x` s.t. `A x >= b`, `lo <= x <= hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<f64>,
    rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = objective.len();
        if lower.len() != n || upper.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: lower.len().min(upper.len()),
            });
        }
        if objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("objective must be finite".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                return Err(Error::InvalidInput(format!(
                    "invalid bounds for variable {i}"
                )));
            }
            if l > u {
                return Err(Error::Infeasible);
            }
        }
        Ok(Self {
            objective,
            lower,
            upper,
            rows: Vec::new(),
            rhs: Vec::new(),
        })
    }

    /// Adds the constraint `coefs . x >= rhs`.
    pub fn add_constraint(&mut self, coefs: &[f64], rhs: f64) -> Result<()> {
        check_row(self.objective.len(), coefs, rhs)?;
        self.rows.extend_from_slice(coefs);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    pub fn row(&self, i: usize) -> (&[f64], f64) {
        let n = self.n_vars();
        (&self.rows[i * n..(i + 1) * n], self.rhs[i])
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for (i, xi) in x.iter().enumerate() {
            worst = worst.max(self.lower[i] - xi).max(xi - self.upper[i]);
        }
        for i in 0..self.n_rows() {
            let (a, b) = self.row(i);
            let lhs: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
            worst = worst.max(b - lhs);
        }
        worst
    }
}

fn check_row(n: usize, coefs: &[f64], rhs: f64) -> Result<()> {
    if coefs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: coefs.len(),
        });
    }
    if !rhs.is_finite() || coefs.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidInput(
            "constraint coefficients must be finite".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

/// Solves a one-off LP.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution> {
    DualSimplex::new(lp.clone())?.solve()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Basic(usize),
    NonBasic(usize),
}

/// Warm-startable simplex state over a [`LinearProgram`].
#[derive(Debug, Clone)]
pub struct DualSimplex {
    lp: LinearProgram,
    n: usize,
    m: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    artificial_lo: Vec<bool>,
    artificial_hi: Vec<bool>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    slot: Vec<Slot>,
    at_upper: Vec<bool>,
    /// `tab[i * n + j] = d x_basic[i] / d x_nonbasic[j]`.
    tab: Vec<f64>,
    x: Vec<f64>,
    reduced: Vec<f64>,
    pivots_since_refactor: usize,
    total_pivots: usize,
    max_pivots: usize,
}

impl DualSimplex {
    pub fn new(lp: LinearProgram) -> Result<Self> {
        let n = lp.n_vars();
        let mut lo = lp.lower.clone();
        let mut hi = lp.upper.clone();
        let mut artificial_lo = vec![false; n];
        let mut artificial_hi = vec![false; n];
        let mut at_upper = vec![false; n];
        let mut x = vec![0.0; n];
        for j in 0..n {
            let c = lp.objective[j];
            let go_up = c < 0.0 || (c == 0.0 && lo[j] == f64::NEG_INFINITY && hi[j].is_finite());
            if go_up {
                if !hi[j].is_finite() {
                    hi[j] = lo[j].max(0.0) + ARTIFICIAL_BOUND;
                    artificial_hi[j] = true;
                }
                x[j] = hi[j];
                at_upper[j] = true;
            } else {
                if !lo[j].is_finite() {
                    lo[j] = hi[j].min(0.0) - ARTIFICIAL_BOUND;
                    artificial_lo[j] = true;
                }
                x[j] = lo[j];
            }
        }
        let mut s = Self {
            n,
            m: 0,
            lo,
            hi,
            artificial_lo,
            artificial_hi,
            basic: Vec::new(),
            nonbasic: (0..n).collect(),
            slot: (0..n).map(Slot::NonBasic).collect(),
            at_upper,
            tab: Vec::new(),
            x,
            reduced: lp.objective.clone(),
            pivots_since_refactor: 0,
            total_pivots: 0,
            max_pivots: 100_000,
            lp: LinearProgram {
                rows: Vec::new(),
                rhs: Vec::new(),
                ..lp.clone()
            },
        };
        for i in 0..lp.n_rows() {
            let (a, b) = lp.row(i);
            s.push_row(a.to_vec(), b);
        }
        Ok(s)
    }

    pub fn problem(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn n_rows(&self) -> usize {
        self.m
    }

    pub fn total_pivots(&self) -> usize {
        self.total_pivots
    }

    /// Appends `coefs . x >= rhs`; the current basis is kept with the new
    /// slack basic.
    pub fn add_constraint(&mut self, coefs: &[f64], rhs: f64) -> Result<()> {
        check_row(self.n, coefs, rhs)?;
        self.push_row(coefs.to_vec(), rhs);
        Ok(())
    }

    fn push_row(&mut self, coefs: Vec<f64>, rhs: f64) {
        let n = self.n;
        let mut row = vec![0.0; n];
        for (j, &u) in self.nonbasic.iter().enumerate() {
            if u < n {
                row[j] = coefs[u];
            }
        }
        for (b, &coef) in coefs.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            if let Slot::Basic(i) = self.slot[b] {
                let src = &self.tab[i * n..(i + 1) * n];
                for (r, t) in row.iter_mut().zip(src) {
                    *r += coef * t;
                }
            }
        }
        let value: f64 = coefs.iter().zip(&self.x).map(|(a, v)| a * v).sum::<f64>() - rhs;

        let var = n + self.m;
        self.lp.rows.extend_from_slice(&coefs);
        self.lp.rhs.push(rhs);
        self.lo.push(0.0);
        self.hi.push(f64::INFINITY);
        self.at_upper.push(false);
        self.x.push(value);
        self.slot.push(Slot::Basic(self.m));
        self.basic.push(var);
        self.tab.extend_from_slice(&row);
        self.m += 1;
    }

    /// Changes the bounds of structural variable `var`, keeping the basis.
    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> Result<()> {
        if var >= self.n || !(lo <= hi) {
            return Err(Error::InvalidInput(format!(
                "bad bounds for variable {var}"
            )));
        }
        self.lp.lower[var] = lo;
        self.lp.upper[var] = hi;
        let (lo, art_lo) = if lo.is_finite() {
            (lo, false)
        } else {
            (hi.min(0.0) - ARTIFICIAL_BOUND, true)
        };
        let (hi, art_hi) = if hi.is_finite() {
            (hi, false)
        } else {
            (lo.max(0.0) + ARTIFICIAL_BOUND, true)
        };
        self.lo[var] = lo;
        self.hi[var] = hi;
        self.artificial_lo[var] = art_lo;
        self.artificial_hi[var] = art_hi;
        if let Slot::NonBasic(j) = self.slot[var] {
            // Keep dual feasibility: a nonbasic variable sits on the bound
            // that matches the sign of its reduced cost.
            let up = self.reduced[j] < 0.0 || (self.reduced[j] == 0.0 && self.at_upper[var]);
            let target = if up { hi } else { lo };
            self.at_upper[var] = up;
            let delta = target - self.x[var];
            self.move_nonbasic(j, delta);
        }
        Ok(())
    }

    fn move_nonbasic(&mut self, j: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        let n = self.n;
        for i in 0..self.m {
            let t = self.tab[i * n + j];
            if t != 0.0 {
                self.x[self.basic[i]] += t * delta;
            }
        }
        self.x[self.nonbasic[j]] += delta;
    }

    fn primal_tol(&self, var: usize) -> f64 {
        let scale = if var >= self.n {
            self.lp.rhs[var - self.n].abs()
        } else {
            self.lo[var].abs().min(self.hi[var].abs())
        };
        PRIMAL_TOL * (1.0 + scale)
    }

    pub fn solve(&mut self) -> Result<LpSolution> {
        let mut refactored = false;
        let mut degenerate = 0usize;
        loop {
            if self.total_pivots > self.max_pivots {
                return Err(Error::NoConvergence {
                    what: "simplex",
                    iterations: self.total_pivots,
                });
            }
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let bland = degenerate > DEGENERATE_BEFORE_BLAND;
            if let Some(p) = self.choose_leaving(bland) {
                let b = self.basic[p];
                let below = self.x[b] < self.lo[b];
                match self.choose_entering_dual(p, below, bland) {
                    Some((q, ratio)) => {
                        let target = if below { self.lo[b] } else { self.hi[b] };
                        self.pivot(p, q, target);
                        self.at_upper[b] = !below && self.lo[b] != self.hi[b];
                        degenerate = if ratio == 0.0 { degenerate + 1 } else { 0 };
                        refactored = false;
                    }
                    None if !refactored => {
                        self.refactor()?;
                        refactored = true;
                    }
                    None => return Err(Error::Infeasible),
                }
                continue;
            }
            // Primal feasible: clean up any dual infeasibility.
            if let Some((q, dir)) = self.choose_entering_primal(bland) {
                let moved = self.primal_step(q, dir)?;
                degenerate = if moved { 0 } else { degenerate + 1 };
                refactored = false;
                continue;
            }
            if !refactored {
                self.refactor()?;
                refactored = true;
                continue;
            }
            break;
        }
        for j in 0..self.n {
            let u = self.nonbasic[j];
            if u < self.n && self.reduced[j].abs() > DUAL_TOL {
                let on_art = (self.artificial_lo[u] && !self.at_upper[u])
                    || (self.artificial_hi[u] && self.at_upper[u]);
                if on_art {
                    return Err(Error::LpUnbounded);
                }
            }
        }
        let x = self.x[..self.n].to_vec();
        let objective = self.lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution {
            x,
            objective,
            pivots: self.total_pivots,
        })
    }

    fn choose_leaving(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &b) in self.basic.iter().enumerate() {
            let tol = self.primal_tol(b);
            let infeas = (self.lo[b] - self.x[b]).max(self.x[b] - self.hi[b]);
            if infeas <= tol {
                continue;
            }
            let better = match best {
                None => true,
                Some((bi, bv)) => {
                    if bland {
                        b < self.basic[bi]
                    } else {
                        infeas > bv
                    }
                }
            };
            if better {
                best = Some((i, infeas));
            }
        }
        best.map(|(i, _)| i)
    }

    fn choose_entering_dual(&self, p: usize, below: bool, bland: bool) -> Option<(usize, f64)> {
        let n = self.n;
        let row = &self.tab[p * n..(p + 1) * n];
        let row_max = row.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        let tol = PIVOT_TOL * row_max.max(1e-300);
        let sigma = if below { 1.0 } else { -1.0 };
        let mut best: Option<(usize, f64, f64)> = None;
        for (j, &a) in row.iter().enumerate() {
            let u = self.nonbasic[j];
            if self.lo[u] == self.hi[u] {
                continue;
            }
            let dir = if self.at_upper[u] { -1.0 } else { 1.0 };
            if sigma * a * dir <= tol {
                continue;
            }
            let ratio = (self.reduced[j] * dir).max(0.0) / a.abs();
            let better = match best {
                None => true,
                Some((bj, br, ba)) => {
                    let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br);
                    if bland {
                        ratio < br - 1e-12 * (1.0 + br) || (tie && u < self.nonbasic[bj])
                    } else {
                        ratio < br - 1e-12 * (1.0 + br) || (tie && a.abs() > ba)
                    }
                }
            };
            if better {
                best = Some((j, ratio, a.abs()));
            }
        }
        best.map(|(j, r, _)| (j, r))
    }

    fn choose_entering_primal(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for (j, &d) in self.reduced.iter().enumerate() {
            let u = self.nonbasic[j];
            if self.lo[u] == self.hi[u] {
                continue;
            }
            let dir = if self.at_upper[u] {
                if d > DUAL_TOL {
                    -1.0
                } else {
                    continue;
                }
            } else if d < -DUAL_TOL {
                1.0
            } else {
                continue;
            };
            let better = match best {
                None => true,
                Some((bj, _, bd)) => {
                    if bland {
                        u < self.nonbasic[bj]
                    } else {
                        d.abs() > bd
                    }
                }
            };
            if better {
                best = Some((j, dir, d.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Moves nonbasic column `q` in direction `dir` as far as the bounds
    /// allow. Returns whether the step was nondegenerate.
    fn primal_step(&mut self, q: usize, dir: f64) -> Result<bool> {
        let n = self.n;
        let u = self.nonbasic[q];
        let mut step = self.hi[u] - self.lo[u];
        let mut leave: Option<(usize, f64, f64)> = None;
        let col_max = (0..self.m).fold(0.0_f64, |m, i| m.max(self.tab[i * n + q].abs()));
        let tol = PIVOT_TOL * col_max.max(1e-300);
        for i in 0..self.m {
            let rate = self.tab[i * n + q] * dir;
            if rate.abs() <= tol {
                continue;
            }
            let b = self.basic[i];
            let limit = if rate > 0.0 {
                (self.hi[b] - self.x[b]) / rate
            } else {
                (self.lo[b] - self.x[b]) / rate
            };
            if !limit.is_finite() {
                continue;
            }
            let limit = limit.max(0.0);
            let better = match leave {
                None => limit < step,
                Some((_, best, brate)) => {
                    limit < best - 1e-12 * (1.0 + best)
                        || ((limit - best).abs() <= 1e-12 * (1.0 + best) && rate.abs() > brate)
                }
            };
            if better {
                step = limit;
                leave = Some((i, limit, rate.abs()));
            }
        }
        if !step.is_finite() {
            return Err(Error::LpUnbounded);
        }
        match leave {
            Some((p, _, _)) => {
                let b = self.basic[p];
                let rate = self.tab[p * n + q] * dir;
                let to_upper = rate > 0.0;
                let target = if to_upper { self.hi[b] } else { self.lo[b] };
                self.pivot(p, q, target);
                self.at_upper[b] = to_upper && self.lo[b] != self.hi[b];
            }
            None => {
                self.move_nonbasic(q, dir * step);
                let target = if dir > 0.0 { self.hi[u] } else { self.lo[u] };
                self.x[u] = target;
                self.at_upper[u] = dir > 0.0;
            }
        }
        Ok(step > 0.0)
    }

    fn pivot(&mut self, p: usize, q: usize, target: f64) {
        let n = self.n;
        let leave = self.basic[p];
        let enter = self.nonbasic[q];
        let piv = self.tab[p * n + q];
        let step = (target - self.x[leave]) / piv;

        self.move_nonbasic(q, step);
        self.x[leave] = target;

        let mut prow: Vec<f64> = self.tab[p * n..(p + 1) * n]
            .iter()
            .map(|a| -a / piv)
            .collect();
        prow[q] = 1.0 / piv;
        for i in 0..self.m {
            if i == p {
                continue;
            }
            let t = self.tab[i * n + q];
            if t == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * n..(i + 1) * n];
            for (r, pr) in row.iter_mut().zip(&prow) {
                *r += t * pr;
            }
            row[q] = t * prow[q];
        }
        self.tab[p * n..(p + 1) * n].copy_from_slice(&prow);

        let dq = self.reduced[q];
        for (d, pr) in self.reduced.iter_mut().zip(&prow) {
            *d += dq * pr;
        }
        self.reduced[q] = dq * prow[q];

        self.basic[p] = enter;
        self.nonbasic[q] = leave;
        self.slot[enter] = Slot::Basic(p);
        self.slot[leave] = Slot::NonBasic(q);
        self.pivots_since_refactor += 1;
        self.total_pivots += 1;
    }

    /// Recomputes the dictionary, values and reduced costs from the basis
    /// and the original data.
    fn refactor(&mut self) -> Result<()> {
        let n = self.n;
        let a = &self.lp.rows;
        let basic_struct: Vec<(usize, usize)> = self
            .basic
            .iter()
            .enumerate()
            .filter(|(_, &b)| b < n)
            .map(|(i, &b)| (i, b))
            .collect();
        let tight: Vec<(usize, usize)> = self
            .nonbasic
            .iter()
            .enumerate()
            .filter(|(_, &u)| u >= n)
            .map(|(j, &u)| (j, u - n))
            .collect();
        let k = basic_struct.len();
        debug_assert_eq!(k, tight.len());

        let mut kmat = vec![0.0; k * k];
        for (r, &(_, row)) in tight.iter().enumerate() {
            for (c, &(_, var)) in basic_struct.iter().enumerate() {
                kmat[r * k + c] = a[row * n + var];
            }
        }
        let lu = if k > 0 {
            Some(Lu::factor(kmat, k).ok_or(Error::NoConvergence {
                what: "simplex basis factorization",
                iterations: self.total_pivots,
            })?)
        } else {
            None
        };

        // Nonbasic slacks of tight rows are at zero; structurals at bounds.
        for &(j, _) in &tight {
            let u = self.nonbasic[j];
            self.x[u] = 0.0;
        }
        for &u in &self.nonbasic {
            if u < n {
                self.x[u] = if self.at_upper[u] {
                    self.hi[u]
                } else {
                    self.lo[u]
                };
            }
        }

        let mut rhs: Vec<f64> = tight
            .iter()
            .map(|&(j, row)| {
                let mut s = self.lp.rhs[row] + self.x[self.nonbasic[j]];
                for &u in &self.nonbasic {
                    if u < n {
                        s -= a[row * n + u] * self.x[u];
                    }
                }
                s
            })
            .collect();
        if let Some(lu) = &lu {
            lu.solve(&mut rhs);
        }
        for (c, &(_, var)) in basic_struct.iter().enumerate() {
            self.x[var] = rhs[c];
        }
        for &b in &self.basic {
            if b >= n {
                let row = b - n;
                let lhs: f64 = (0..n).map(|v| a[row * n + v] * self.x[v]).sum();
                self.x[b] = lhs - self.lp.rhs[row];
            }
        }

        let tight_pos: std::collections::HashMap<usize, usize> = tight
            .iter()
            .enumerate()
            .map(|(pos, &(j, _))| (j, pos))
            .collect();
        let mut y = vec![0.0; k];
        for j in 0..n {
            let u = self.nonbasic[j];
            if u < n {
                for (r, &(_, row)) in tight.iter().enumerate() {
                    y[r] = -a[row * n + u];
                }
            } else {
                y.iter_mut().for_each(|v| *v = 0.0);
                y[tight_pos[&j]] = 1.0;
            }
            if let Some(lu) = &lu {
                lu.solve(&mut y);
            }
            let mut dj = if u < n { self.lp.objective[u] } else { 0.0 };
            for (c, &(i, var)) in basic_struct.iter().enumerate() {
                self.tab[i * n + j] = y[c];
                dj += self.lp.objective[var] * y[c];
            }
            self.reduced[j] = dj;
            for (i, &b) in self.basic.iter().enumerate() {
                if b >= n {
                    let row = b - n;
                    let mut t = if u < n { a[row * n + u] } else { 0.0 };
                    for (c, &(_, var)) in basic_struct.iter().enumerate() {
                        t += a[row * n + var] * y[c];
                    }
                    self.tab[i * n + j] = t;
                }
            }
        }
        self.pivots_since_refactor = 0;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(obj: &[f64], lo: &[f64], hi: &[f64], rows: &[(&[f64], f64)]) -> LinearProgram {
        let mut p = LinearProgram::new(obj.to_vec(), lo.to_vec(), hi.to_vec()).unwrap();
        for (a, b) in rows {
            p.add_constraint(a, *b).unwrap();
        }
        p
    }

    #[test]
    fn single_lower_bound_row() {
        let p = lp(&[1.0], &[0.0], &[10.0], &[(&[1.0], 3.0)]);
        let s = lp_solve(&p).unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-12);
        assert!((s.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_face() {
        let p = lp(&[1.0, 1.0], &[0.0, 0.0], &[1.0, 1.0], &[(&[1.0, 1.0], 1.0)]);
        let s = lp_solve(&p).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!(p.max_violation(&s.x) < 1e-10);
    }

    #[test]
    fn maximization_with_upper_bounds() {
        // max x + 2y s.t. x + y <= 4, x <= 3, y <= 3  =>  x = 1, y = 3
        let p = lp(
            &[-1.0, -2.0],
            &[0.0, 0.0],
            &[3.0, 3.0],
            &[(&[-1.0, -1.0], -4.0)],
        );
        let s = lp_solve(&p).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        let p = lp(&[1.0], &[0.0], &[1.0], &[(&[1.0], 2.0)]);
        assert!(matches!(lp_solve(&p), Err(Error::Infeasible)));
        assert!(matches!(
            LinearProgram::new(vec![1.0], vec![2.0], vec![1.0]),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn unbounded_detected() {
        let p = lp(&[-1.0], &[0.0], &[f64::INFINITY], &[(&[1.0], 1.0)]);
        assert!(matches!(lp_solve(&p), Err(Error::LpUnbounded)));
    }

    #[test]
    fn free_variable_bounded_by_rows() {
        // min z s.t. z >= x - 1, z >= 1 - x, x in [0, 3], z free  =>  z = 0
        let p = lp(
            &[0.0, 1.0],
            &[0.0, f64::NEG_INFINITY],
            &[3.0, f64::INFINITY],
            &[(&[-1.0, 1.0], -1.0), (&[1.0, 1.0], 1.0)],
        );
        let s = lp_solve(&p).unwrap();
        assert!(s.objective.abs() < 1e-12);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn warm_start_matches_cold_solve() {
        let mut p = lp(
            &[1.0, 1.0, 0.0],
            &[0.0, 0.0, -5.0],
            &[10.0, 10.0, 5.0],
            &[(&[1.0, 2.0, 1.0], 4.0)],
        );
        let mut warm = DualSimplex::new(p.clone()).unwrap();
        warm.solve().unwrap();
        let extra: [(&[f64], f64); 3] = [
            (&[2.0, 1.0, -1.0], 3.0),
            (&[1.0, 1.0, 1.0], 6.0),
            (&[1.0, -1.0, 0.0], -2.0),
        ];
        for (a, b) in extra {
            warm.add_constraint(a, b).unwrap();
            p.add_constraint(a, b).unwrap();
            let w = warm.solve().unwrap();
            let c = lp_solve(&p).unwrap();
            assert!((w.objective - c.objective).abs() < 1e-10);
            assert!(p.max_violation(&w.x) < 1e-9);
        }
    }

    #[test]
    fn set_bounds_moves_solution() {
        let p = lp(&[1.0], &[-1.0], &[1.0], &[]);
        let mut s = DualSimplex::new(p).unwrap();
        assert_eq!(s.solve().unwrap().x[0], -1.0);
        s.set_bounds(0, -2.0, 1.0).unwrap();
        assert_eq!(s.solve().unwrap().x[0], -2.0);
    }
}
