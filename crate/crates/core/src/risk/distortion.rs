use std::sync::OnceLock;

use super::es::{es_bucket_weight, tail_index};
use super::{ascending_order, check_sample, share_ties, SampleRisk};
use crate::error::{Error, Result};
use crate::types::{portfolio_losses, Distortion, ScenarioMatrix};

const MASS_TOL: f64 = 1e-8;

/// Pointwise weight `gamma(u)` for `u` in `(0, 1)`.
pub fn gamma_at(distortion: &Distortion, u: f64) -> f64 {
    match distortion {
        Distortion::Expectation => 1.0,
        Distortion::ExpectedShortfall { alpha } => {
            if u > *alpha {
                1.0 / (1.0 - alpha)
            } else {
                0.0
            }
        }
        Distortion::Power { exponent } => exponent * (1.0 - u).powf(exponent - 1.0),
        Distortion::Grid { u: grid, gamma } => interpolate(grid, gamma, u),
        Distortion::Custom(f) => f(u),
    }
}

fn interpolate(grid: &[f64], gamma: &[f64], u: f64) -> f64 {
    let last = grid.len() - 1;
    if u <= grid[0] {
        return gamma[0];
    }
    if u >= grid[last] {
        return gamma[last];
    }
    let k = grid.partition_point(|&g| g <= u) - 1;
    let s = (u - grid[k]) / (grid[k + 1] - grid[k]);
    gamma[k] + s * (gamma[k + 1] - gamma[k])
}

/// `G(u) = int_0^u gamma` for a piecewise-linear grid, constant extension
/// outside the grid.
struct GridAntiderivative<'a> {
    grid: &'a [f64],
    gamma: &'a [f64],
    cumulative: Vec<f64>,
}

impl<'a> GridAntiderivative<'a> {
    fn new(grid: &'a [f64], gamma: &'a [f64]) -> Self {
        let mut cumulative = Vec::with_capacity(grid.len());
        let mut acc = gamma[0] * grid[0];
        cumulative.push(acc);
        for k in 1..grid.len() {
            acc += 0.5 * (gamma[k - 1] + gamma[k]) * (grid[k] - grid[k - 1]);
            cumulative.push(acc);
        }
        Self {
            grid,
            gamma,
            cumulative,
        }
    }

    fn at(&self, u: f64) -> f64 {
        let last = self.grid.len() - 1;
        if u <= self.grid[0] {
            return self.gamma[0] * u;
        }
        if u >= self.grid[last] {
            return self.cumulative[last] + self.gamma[last] * (u - self.grid[last]);
        }
        let k = self.grid.partition_point(|&g| g <= u) - 1;
        let g_u = interpolate(self.grid, self.gamma, u);
        self.cumulative[k] + 0.5 * (self.gamma[k] + g_u) * (u - self.grid[k])
    }
}

/// 16-point Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre_16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 16;
        let mut rule = Vec::with_capacity(n);
        for i in 1..=n {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    })
}

fn quadrature(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * gauss_legendre_16()
        .iter()
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

/// Mass of `gamma` on each bucket `((j-1)/N, j/N]`, `j = 1..N`.
pub(crate) fn bucket_weights(distortion: &Distortion, n: usize) -> Result<Vec<f64>> {
    let nf = n as f64;
    let weights: Vec<f64> = match distortion {
        Distortion::Expectation => vec![1.0 / nf; n],
        Distortion::ExpectedShortfall { alpha } => {
            let k = tail_index(*alpha, n);
            (1..=n).map(|j| es_bucket_weight(j, n, *alpha, k)).collect()
        }
        Distortion::Power { exponent } => (1..=n)
            .map(|j| {
                let hi = 1.0 - (j - 1) as f64 / nf;
                let lo = 1.0 - j as f64 / nf;
                hi.powf(*exponent) - lo.powf(*exponent)
            })
            .collect(),
        Distortion::Grid { u, gamma } => {
            let g = GridAntiderivative::new(u, gamma);
            let edges: Vec<f64> = (0..=n).map(|j| g.at(j as f64 / nf)).collect();
            edges.windows(2).map(|w| w[1] - w[0]).collect()
        }
        Distortion::Custom(f) => (1..=n)
            .map(|j| quadrature(f.as_ref(), (j - 1) as f64 / nf, j as f64 / nf))
            .collect(),
    };
    if weights.iter().any(|w| !w.is_finite() || *w < -1e-15) {
        return Err(Error::InvalidInput(
            "distortion weights must be finite and nonnegative".into(),
        ));
    }
    let mass: f64 = weights.iter().sum();
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::BadDistortionMass(mass));
    }
    Ok(weights)
}

/// Distortion risk `int_0^1 gamma(u) F^{-1}(u) du` on the empirical
/// distribution: the `j`-th smallest loss is weighted by the mass of `gamma`
/// on `((j-1)/N, j/N]`. Tied losses share their weight equally.
pub fn distortion_sample(losses: &[f64], distortion: &Distortion) -> Result<SampleRisk> {
    check_sample(losses, None)?;
    if let Distortion::ExpectedShortfall { alpha } = distortion {
        crate::types::check_alpha(*alpha)?;
    }
    let n = losses.len();
    let weights = bucket_weights(distortion, n)?;
    let order = ascending_order(losses);
    let mut zeta = vec![0.0; n];
    let mut value = 0.0;
    for (&idx, &w) in order.iter().zip(&weights) {
        let w = w.max(0.0);
        zeta[idx] = w;
        value += w * losses[idx];
    }
    share_ties(losses, &order, &mut zeta);
    Ok(SampleRisk {
        value,
        t_star: None,
        zeta,
    })
}

/// Empirical marginal risks `MR_i = E[xi_i gamma(F_L(L))]`, with the
/// portfolio-loss distribution function estimated by `rank / (N + 1)`.
pub fn distortion_marginal_risks_mc(
    sm: &ScenarioMatrix,
    v: &[f64],
    distortion: &Distortion,
) -> Result<Vec<f64>> {
    let losses = portfolio_losses(sm, v)?;
    if losses.len() < 2 {
        return Err(Error::InvalidInput(
            "marginal risk estimation needs at least two scenarios".into(),
        ));
    }
    let n = losses.len();
    let order = ascending_order(&losses);
    let mut mr = vec![0.0; sm.n_assets()];
    for (rank, &j) in order.iter().enumerate() {
        let g = gamma_at(distortion, (rank + 1) as f64 / (n + 1) as f64);
        for (m, x) in mr.iter_mut().zip(sm.row(j)) {
            *m += x * g;
        }
    }
    mr.iter_mut().for_each(|m| *m /= n as f64);
    Ok(mr)
}
