use super::{ascending_order, check_sample, share_ties, SampleRisk};
use crate::error::Result;

/// 1-based position `ceil(alpha * n)` of the VaR order statistic; zero when
/// `alpha == 0`.
pub fn tail_index(alpha: f64, n: usize) -> usize {
    let k = alpha * n as f64;
    // Guard against alpha * n landing a hair above an integer.
    (k - 1e-9).ceil().max(0.0) as usize
}

/// Weight of the `j`-th smallest of `n` losses (1-based) under Expected
/// Shortfall at level `alpha`: the integral of `1{u > alpha} / (1 - alpha)`
/// over `((j - 1)/n, j/n]`.
pub(crate) fn es_bucket_weight(j: usize, n: usize, alpha: f64, k: usize) -> f64 {
    let nf = n as f64;
    if j > k {
        1.0 / (nf * (1.0 - alpha))
    } else if j == k {
        (k as f64 / nf - alpha) / (1.0 - alpha)
    } else {
        0.0
    }
}

/// Sample Expected Shortfall via the Rockafellar-Uryasev minimum on the
/// empirical distribution.
///
/// `t_star` is the `ceil(alpha N)`-th order statistic. `zeta` puts
/// `1 / (N (1 - alpha))` on every loss ranked above it and the remaining mass
/// on the order statistic itself. Tied losses share their weight equally.
pub fn es_sample(losses: &[f64], alpha: f64) -> Result<SampleRisk> {
    check_sample(losses, Some(alpha))?;
    let n = losses.len();
    let order = ascending_order(losses);
    let k = tail_index(alpha, n);
    let mut zeta = vec![0.0; n];
    let mut value = 0.0;
    for (pos, &idx) in order.iter().enumerate() {
        let w = es_bucket_weight(pos + 1, n, alpha, k);
        zeta[idx] = w;
        value += w * losses[idx];
    }
    share_ties(losses, &order, &mut zeta);
    let t_star = losses[order[k.max(1) - 1]];
    Ok(SampleRisk {
        value,
        t_star: Some(t_star),
        zeta,
    })
}
