//! Closed forms for elliptical returns.
//!
//! With returns `r ~ N(mu, Sigma)` the portfolio loss `L(v) = -r^T v` is
//! Gaussian with mean `-v^T mu` and standard deviation `sqrt(v^T Sigma v)`, so
//! every measure here is `mean + kappa * sd` and the marginal risks are
//! `-mu_i + kappa (Sigma v)_i / sd`.

use serde::Serialize;
use statrs::distribution::{Continuous, ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::types::check_alpha;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianKind {
    ExpectedShortfall,
    EntropicVaR,
}

/// `phi(Phi^{-1}(alpha)) / (1 - alpha)`.
pub fn es_multiplier(alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let n = Normal::standard();
    n.pdf(n.inverse_cdf(alpha)) / (1.0 - alpha)
}

/// `sqrt(-2 log(1 - alpha))`, from minimizing
/// `t log(1/(1-alpha)) + mu + sigma^2 / (2t)` over `t > 0`.
pub fn evar_multiplier(alpha: f64) -> f64 {
    (-2.0 * (1.0 - alpha).ln()).sqrt()
}

pub fn multiplier(kind: GaussianKind, alpha: f64) -> f64 {
    match kind {
        GaussianKind::ExpectedShortfall => es_multiplier(alpha),
        GaussianKind::EntropicVaR => evar_multiplier(alpha),
    }
}

/// Expected Shortfall multiplier of a standard Student t with `nu` degrees of
/// freedom: `f(q) (nu + q^2) / ((nu - 1)(1 - alpha))` with `q` the
/// `alpha`-quantile.
pub fn student_t_es_multiplier(nu: f64, alpha: f64) -> Result<f64> {
    if !(nu > 1.0) {
        return Err(Error::InvalidInput(format!(
            "Student t Expected Shortfall needs nu > 1, got {nu}"
        )));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let t = StudentsT::new(0.0, 1.0, nu).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let q = t.inverse_cdf(alpha);
    Ok(t.pdf(q) * (nu + q * q) / ((nu - 1.0) * (1.0 - alpha)))
}

/// ES of a Gaussian loss with mean `mu_l` and standard deviation `sigma_l`.
pub fn es_gaussian(mu_l: f64, sigma_l: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(mu_l + es_multiplier(alpha) * sigma_l)
}

/// Entropic VaR of a Gaussian loss.
pub fn evar_gaussian(mu_l: f64, sigma_l: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(mu_l + evar_multiplier(alpha) * sigma_l)
}

fn sigma_times(sigma: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let d = v.len();
    if sigma.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            got: sigma.len(),
        });
    }
    Ok((0..d)
        .map(|i| (0..d).map(|j| sigma[i * d + j] * v[j]).sum())
        .collect())
}

/// Portfolio risk `-v^T mu + kappa sqrt(v^T Sigma v)`.
pub fn gaussian_portfolio_risk(
    mu: &[f64],
    sigma: &[f64],
    v: &[f64],
    alpha: f64,
    kind: GaussianKind,
) -> Result<f64> {
    check_alpha(alpha)?;
    let sv = sigma_times(sigma, v)?;
    let var: f64 = sv.iter().zip(v).map(|(a, b)| a * b).sum();
    let mean: f64 = -mu.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    Ok(mean + multiplier(kind, alpha) * var.max(0.0).sqrt())
}

/// Closed-form marginal risks `-mu_i + kappa (Sigma v)_i / sigma_L`.
pub fn gaussian_marginal_risks(
    mu: &[f64],
    sigma: &[f64],
    v: &[f64],
    alpha: f64,
    kind: GaussianKind,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if mu.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            got: mu.len(),
        });
    }
    elliptical_marginal_risks(mu, sigma, v, multiplier(kind, alpha))
}

/// Marginal risks for any `mean + kappa * sd` measure of an elliptical loss.
pub fn elliptical_marginal_risks(
    mu: &[f64],
    sigma: &[f64],
    v: &[f64],
    kappa: f64,
) -> Result<Vec<f64>> {
    let sv = sigma_times(sigma, v)?;
    let var: f64 = sv.iter().zip(v).map(|(a, b)| a * b).sum();
    if !(var > 0.0) {
        return Err(Error::InvalidInput(
            "portfolio variance is zero; marginal risks are undefined".into(),
        ));
    }
    let sd = var.sqrt();
    Ok(mu
        .iter()
        .zip(&sv)
        .map(|(m, s)| -m + kappa * s / sd)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn es_at_95() {
        // phi(1.6448536...) / 0.05
        let es = es_gaussian(0.0, 1.0, 0.95).unwrap();
        assert!((es - 2.062712807).abs() < 1e-8, "{es}");
        assert_eq!(es_gaussian(0.3, 0.0, 0.95).unwrap(), 0.3);
        assert_eq!(es_gaussian(0.3, 2.0, 0.0).unwrap(), 0.3);
    }

    #[test]
    fn evar_at_95() {
        let e = evar_gaussian(0.0, 1.0, 0.95).unwrap();
        assert!((e - (2.0 * 20f64.ln()).sqrt()).abs() < 1e-14);
        assert!((e - 2.4477).abs() < 1e-4);
    }

    #[test]
    fn symmetric_identity_case() {
        let mr = gaussian_marginal_risks(
            &[0.0, 0.0],
            &[1.0, 0.0, 0.0, 1.0],
            &[1.0, 1.0],
            0.95,
            GaussianKind::ExpectedShortfall,
        )
        .unwrap();
        let expected = es_multiplier(0.95) / 2f64.sqrt();
        assert!((mr[0] - expected).abs() < 1e-15 && (mr[1] - expected).abs() < 1e-15);
    }

    #[test]
    fn euler_identity() {
        let mu = [0.05, -0.02, 0.1];
        let sigma = [0.04, 0.01, 0.0, 0.01, 0.09, 0.02, 0.0, 0.02, 0.16];
        let v = [0.7, 1.9, 0.4];
        for kind in [GaussianKind::ExpectedShortfall, GaussianKind::EntropicVaR] {
            let mr = gaussian_marginal_risks(&mu, &sigma, &v, 0.9, kind).unwrap();
            let total: f64 = mr.iter().zip(&v).map(|(a, b)| a * b).sum();
            let risk = gaussian_portfolio_risk(&mu, &sigma, &v, 0.9, kind).unwrap();
            assert!((total - risk).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_contributions_scale_with_variance() {
        let (s1, s2) = (0.1, 0.3);
        let v = [2.0, 0.5];
        let mr = gaussian_marginal_risks(
            &[0.0, 0.0],
            &[s1 * s1, 0.0, 0.0, s2 * s2],
            &v,
            0.9,
            GaussianKind::ExpectedShortfall,
        )
        .unwrap();
        let rc = [v[0] * mr[0], v[1] * mr[1]];
        let ratio = rc[0] / rc[1];
        let expected = (v[0] * v[0] * s1 * s1) / (v[1] * v[1] * s2 * s2);
        assert!((ratio - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_rejected() {
        assert!(gaussian_marginal_risks(
            &[0.0],
            &[0.0],
            &[1.0],
            0.9,
            GaussianKind::ExpectedShortfall
        )
        .is_err());
    }

    #[test]
    fn student_t_approaches_gaussian() {
        let t = student_t_es_multiplier(1e4, 0.95).unwrap();
        assert!((t - es_multiplier(0.95)).abs() < 1e-3);
        assert!(student_t_es_multiplier(5.0, 0.95).unwrap() > es_multiplier(0.95));
    }
}
