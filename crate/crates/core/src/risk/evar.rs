use super::{check_sample, SampleRisk};
use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 200;

/// Shifted log-sum-exp pieces at temperature `t`: the derivative of the EVaR
/// objective and the normalized scenario weights.
struct Tilt {
    /// `log((1/N) sum_j exp((l_j - max)/t))`
    log_mean: f64,
    /// `E_zeta[l]` under `zeta_j ~ exp(l_j / t)`
    tilted_mean: f64,
}

fn tilt(losses: &[f64], max: f64, t: f64) -> Tilt {
    let mut s = 0.0;
    let mut sl = 0.0;
    for &l in losses {
        let e = ((l - max) / t).exp();
        s += e;
        sl += e * l;
    }
    Tilt {
        log_mean: (s / losses.len() as f64).ln(),
        tilted_mean: sl / s,
    }
}

/// `d/dt [t log K + t log E exp(L/t)]`, which is increasing in `t`.
fn slope(log_k: f64, losses: &[f64], max: f64, t: f64) -> f64 {
    let tl = tilt(losses, max, t);
    log_k + tl.log_mean + (max - tl.tilted_mean) / t
}

/// Sample Entropic Value-at-Risk
/// `inf_{t > 0} t log( (1/(1-alpha)) (1/N) sum_j exp(l_j / t) )`.
///
/// The objective is convex in `t`; its minimizer is located by bisection on
/// the sign of the derivative in `log t`, bracketed by geometric expansion.
/// All exponentials are shifted by the largest loss.
///
/// Degenerate cases return closed forms: `alpha = 0` and constant losses give
/// the mean with uniform `zeta` and no `t_star`; when the infimum is reached
/// as `t -> 0` the value is the largest loss and `zeta` is uniform over its
/// ties, with `t_star = 0`.
pub fn evar_sample(losses: &[f64], alpha: f64) -> Result<SampleRisk> {
    check_sample(losses, Some(alpha))?;
    let n = losses.len();
    let nf = n as f64;
    let max = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if alpha == 0.0 || range == 0.0 {
        let value = losses.iter().sum::<f64>() / nf;
        return Ok(SampleRisk {
            value,
            t_star: None,
            zeta: vec![1.0 / nf; n],
        });
    }
    let log_k = -(1.0 - alpha).ln();
    let n_max = losses.iter().filter(|&&l| l == max).count();
    let at_max = || {
        let zeta = losses
            .iter()
            .map(|&l| if l == max { 1.0 / n_max as f64 } else { 0.0 })
            .collect();
        SampleRisk {
            value: max,
            t_star: Some(0.0),
            zeta,
        }
    };
    // f'(0+) = log(K n_max / N); nonnegative means the infimum sits at t -> 0.
    if log_k + (n_max as f64 / nf).ln() >= 0.0 {
        return Ok(at_max());
    }

    let mut lo = 1e-8 * range;
    if slope(log_k, losses, max, lo) >= 0.0 {
        return Ok(at_max());
    }
    let mut hi = range;
    let mut expansions = 0;
    while slope(log_k, losses, max, hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 2000 || !hi.is_finite() {
            return Err(Error::Overflow("entropic VaR bracket"));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) || (hi - lo) <= 1e-15 * hi {
            break;
        }
        if slope(log_k, losses, max, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let tl = tilt(losses, max, t);
    let value = t * log_k + max + t * tl.log_mean;
    if !value.is_finite() {
        return Err(Error::Overflow("entropic VaR"));
    }
    let weights: Vec<f64> = losses.iter().map(|&l| ((l - max) / t).exp()).collect();
    let total: f64 = weights.iter().sum();
    let zeta = weights.iter().map(|w| w / total).collect();
    Ok(SampleRisk {
        value,
        t_star: Some(t),
        zeta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::es_sample;

    /// Independent oracle: golden-section search on the raw (unshifted)
    /// objective over a wide bracket.
    fn golden_oracle(losses: &[f64], alpha: f64) -> f64 {
        let n = losses.len() as f64;
        let f = |t: f64| {
            t * ((1.0 / (1.0 - alpha)) * losses.iter().map(|l| (l / t).exp()).sum::<f64>() / n).ln()
        };
        let (mut a, mut b) = (1e-3_f64.ln(), 1e3_f64.ln());
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if f(c.exp()) < f(d.exp()) {
                b = d;
            } else {
                a = c;
            }
        }
        f((0.5 * (a + b)).exp())
    }

    #[test]
    fn matches_golden_section() {
        let losses = [0.3, -1.2, 4.0, 2.5, 0.7, -0.4, 1.1, 0.0, 2.2, -2.0];
        for alpha in [0.05, 0.5, 0.8] {
            let r = evar_sample(&losses, alpha).unwrap();
            let oracle = golden_oracle(&losses, alpha);
            assert!(
                (r.value - oracle).abs() < 1e-9,
                "{alpha}: {} vs {oracle}",
                r.value
            );
        }
    }

    #[test]
    fn alpha_zero_is_mean() {
        let losses = [1.0, 2.0, 6.0];
        assert_eq!(evar_sample(&losses, 0.0).unwrap().value, 3.0);
    }

    #[test]
    fn constant_losses() {
        assert_eq!(evar_sample(&[1.5; 4], 0.9).unwrap().value, 1.5);
    }

    #[test]
    fn small_sample_saturates_at_max() {
        // 1/(1 - 0.95) = 20 >= N = 10
        let losses: Vec<f64> = (1..=10).map(f64::from).collect();
        let r = evar_sample(&losses, 0.95).unwrap();
        assert_eq!(r.value, 10.0);
        assert_eq!(r.zeta[9], 1.0);
    }

    #[test]
    fn dominates_es() {
        let losses = [0.3, -1.2, 4.0, 2.5, 0.7, -0.4, 1.1, 0.0, 2.2, -2.0];
        for alpha in [0.0, 0.1, 0.5, 0.85] {
            let evar = evar_sample(&losses, alpha).unwrap().value;
            let es = es_sample(&losses, alpha).unwrap().value;
            assert!(evar >= es - 1e-12);
        }
    }

    #[test]
    fn zeta_reproduces_value() {
        let losses = [0.3, -1.2, 4.0, 2.5, 0.7, -0.4, 1.1, 0.0, 2.2, -2.0];
        let r = evar_sample(&losses, 0.7).unwrap();
        let e: f64 = r.zeta.iter().zip(&losses).map(|(z, l)| z * l).sum();
        assert!((e - r.value).abs() <= 1e-12 * r.value.abs());
    }

    #[test]
    fn large_losses_do_not_overflow() {
        let losses = [1e5, 2e5, -3e5, 4e5, 0.0];
        let r = evar_sample(&losses, 0.5).unwrap();
        assert!(r.value.is_finite() && r.value <= 4e5);
    }
}
