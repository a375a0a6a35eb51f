//! Oracles and generators shared by integration tests. They use nothing from
//! the library beyond its data types.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-12 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// `min c^T x` over `A x >= b`, `lo <= x <= hi` (finite bounds) by
/// enumerating every vertex: each choice of `n` active constraints among the
/// rows and bounds. Returns the optimal value, or `None` if infeasible.
pub fn vertex_enumeration(
    c: &[f64],
    rows: &[(Vec<f64>, f64)],
    lo: &[f64],
    hi: &[f64],
) -> Option<f64> {
    let n = c.len();
    let mut planes: Vec<(Vec<f64>, f64)> = rows.to_vec();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lo[j]));
        planes.push((e, hi[j]));
    }
    let feasible = |x: &[f64]| {
        let scale = 1e-9 * (1.0 + x.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
        rows.iter().all(|(a, b)| {
            a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() >= b - scale * (1.0 + b.abs())
        }) && (0..n).all(|j| x[j] >= lo[j] - scale && x[j] <= hi[j] + scale)
    };
    let mut best: Option<f64> = None;
    let mut choose = vec![0usize; n];
    fn next(choose: &mut [usize], m: usize) -> bool {
        let n = choose.len();
        let mut i = n;
        while i > 0 {
            i -= 1;
            if choose[i] < m - n + i {
                choose[i] += 1;
                for j in i + 1..n {
                    choose[j] = choose[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
    for (i, slot) in choose.iter_mut().enumerate() {
        *slot = i;
    }
    loop {
        let a: Vec<Vec<f64>> = choose.iter().map(|&k| planes[k].0.clone()).collect();
        let b: Vec<f64> = choose.iter().map(|&k| planes[k].1).collect();
        if let Some(x) = solve_linear(a, b) {
            if feasible(&x) {
                let value: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(value, |v: f64| v.min(value)));
            }
        }
        if !next(&mut choose, planes.len()) {
            break;
        }
    }
    best
}

/// Scenario matrix rows with entries uniform in `[-1, 1]`, plus an asset
/// specific drift so that assets differ.
pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    let drift: Vec<f64> = (0..d).map(|_| rng.random_range(-0.2..0.2)).collect();
    let scale: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
    (0..n)
        .map(|_| {
            (0..d)
                .map(|i| drift[i] + scale[i] * rng.random_range(-1.0..1.0))
                .collect()
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
