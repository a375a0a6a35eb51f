//! Small dense linear algebra kernels: pivoted Cholesky for covariance
//! factors, LU with partial pivoting for the simplex basis and a Cholesky
//! solve for Newton systems.

use crate::error::{Error, Result};

/// Relative pivot tolerance below which a covariance is treated as rank
/// deficient.
pub const CHOLESKY_PIVOT_TOL: f64 = 1e-10;

/// Factor `F` (`d x rank`, row-major, rows in the original variable order)
/// with `F F^T = sigma` up to the pivot tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    pub dim: usize,
    pub rank: usize,
    pub factor: Vec<f64>,
}

impl CholeskyFactor {
    /// Writes `F z` into `out`; `z` has `rank` entries.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.factor[i * self.rank..(i + 1) * self.rank];
            *o = row.iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }
}

/// Diagonally pivoted Cholesky of a symmetric positive semi-definite matrix.
pub fn pivoted_cholesky(sigma: &[f64], dim: usize) -> Result<CholeskyFactor> {
    if sigma.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            got: sigma.len(),
        });
    }
    let max_diag = (0..dim).map(|i| sigma[i * dim + i]).fold(0.0_f64, f64::max);
    let scale = max_diag.max(f64::MIN_POSITIVE);
    for i in 0..dim {
        for j in 0..i {
            let (a, b) = (sigma[i * dim + j], sigma[j * dim + i]);
            if !a.is_finite() || (a - b).abs() > 1e-12 * scale.max(a.abs()) {
                return Err(Error::InvalidInput(format!(
                    "covariance is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let tol = CHOLESKY_PIVOT_TOL * max_diag;

    // Schur complement, updated in place.
    let mut work = sigma.to_vec();
    let mut perm: Vec<usize> = (0..dim).collect();
    // Columns of the factor, indexed by original row.
    let mut cols: Vec<Vec<f64>> = Vec::new();

    for k in 0..dim {
        let (p_pos, p_val) = (k..dim)
            .map(|idx| (idx, work[perm[idx] * dim + perm[idx]]))
            .fold((k, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
        if p_val <= tol {
            if let Some(idx) =
                (k..dim).find(|&idx| work[perm[idx] * dim + perm[idx]] < -tol.max(1e-14))
            {
                return Err(Error::NotPositiveSemiDefinite {
                    pivot: perm[idx],
                    value: work[perm[idx] * dim + perm[idx]],
                });
            }
            break;
        }
        perm.swap(k, p_pos);
        let p = perm[k];
        let root = p_val.sqrt();
        let mut col = vec![0.0; dim];
        col[p] = root;
        for &r in &perm[k + 1..] {
            col[r] = work[r * dim + p] / root;
        }
        for &r in &perm[k + 1..] {
            for &c in &perm[k + 1..] {
                work[r * dim + c] -= col[r] * col[c];
            }
        }
        cols.push(col);
    }

    let rank = cols.len();
    let mut factor = vec![0.0; dim * rank];
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            factor[r * rank + c] = *v;
        }
    }
    Ok(CholeskyFactor { dim, rank, factor })
}

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl Lu {
    /// Returns `None` when the matrix is numerically singular.
    pub fn factor(mut a: Vec<f64>, n: usize) -> Option<Self> {
        let mut piv: Vec<usize> = (0..n).collect();
        let norm = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            if best <= 1e-13 * norm.max(1.0) {
                return None;
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                piv.swap(k, p);
            }
            let pivot = a[k * n + k];
            for r in k + 1..n {
                let f = a[r * n + k] / pivot;
                a[r * n + k] = f;
                if f != 0.0 {
                    for c in k + 1..n {
                        a[r * n + c] -= f * a[k * n + c];
                    }
                }
            }
        }
        Some(Self { n, lu: a, piv })
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let permuted: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        for r in 0..n {
            let mut s = b[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * b[c];
            }
            b[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = b[r];
            for c in r + 1..n {
                s -= self.lu[r * n + c] * b[c];
            }
            b[r] = s / self.lu[r * n + r];
        }
    }

    /// Solves `A^T x = b` in place.
    pub fn solve_transpose(&self, b: &mut [f64]) {
        let n = self.n;
        // U^T y = b
        for r in 0..n {
            let mut s = b[r];
            for c in 0..r {
                s -= self.lu[c * n + r] * b[c];
            }
            b[r] = s / self.lu[r * n + r];
        }
        // L^T x = y
        for r in (0..n).rev() {
            let mut s = b[r];
            for c in r + 1..n {
                s -= self.lu[c * n + r] * b[c];
            }
            b[r] = s;
        }
        let mut out = vec![0.0; n];
        for (k, &p) in self.piv.iter().enumerate() {
            out[p] = b[k];
        }
        b.copy_from_slice(&out);
    }
}

/// Cholesky factorization in place of a symmetric positive definite `A`
/// (row-major, only the lower triangle is read or written). Returns `false`
/// if a pivot is not positive.
pub fn spd_factor(a: &mut [f64], n: usize) -> bool {
    for k in 0..n {
        let mut d = a[k * n + k];
        for j in 0..k {
            d -= a[k * n + j] * a[k * n + j];
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[k * n + k] = d;
        for i in k + 1..n {
            let mut s = a[i * n + k];
            for j in 0..k {
                s -= a[i * n + j] * a[k * n + j];
            }
            a[i * n + k] = s / d;
        }
    }
    true
}

/// Solves `L L^T x = b` in place with the factor from [`spd_factor`].
pub fn spd_back(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l[i * n + j] * b[j];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= l[j * n + i] * b[j];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solves `A x = b` for a symmetric positive definite `A`, overwriting `a`
/// with its factor and `b` with the solution. Returns `false` if a pivot is
/// not positive.
pub fn spd_solve(a: &mut [f64], n: usize, b: &mut [f64]) -> bool {
    if !spd_factor(a, n) {
        return false;
    }
    spd_back(a, n, b);
    true
}
