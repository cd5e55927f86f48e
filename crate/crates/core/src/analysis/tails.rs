//! Tail laws of a sampled position amplitude p₀(z): a power-law fit and the
//! test against an exponential bound e^{−A|z|}.

use serde::{Deserialize, Serialize};

use super::admissibility::{slope, Verdict};
use crate::error::{invalid, Result};

/// Smallest half-width of the sampled window for a tail verdict, units 1/m.
pub const MIN_TAIL_HALF_WIDTH: f64 = 40.0;

/// Fraction of the half-width, measured from the edge, used for tail fits.
pub const TAIL_FRACTION: f64 = 0.25;

/// A fitted rate counts as exponentially bounded at A when it reaches this
/// fraction of A.
pub const RATE_TOLERANCE: f64 = 0.99;

/// Least-squares fits of ln|p₀| on the tail envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Envelope samples used, as (|z − center|, |p₀|).
    pub envelope: Vec<[f64; 2]>,
    /// s in |p₀| ∝ |z|^s.
    pub power: f64,
    /// κ in |p₀| ∝ e^{−κ|z|}.
    pub rate: f64,
    /// Residual sums of squares of the two fits, in ln|p₀|.
    pub power_rss: f64,
    pub exponential_rss: f64,
}

impl TailFit {
    /// "power" or "exponential", whichever fit has the smaller residual.
    pub fn preferred(&self) -> &'static str {
        if self.power_rss <= self.exponential_rss {
            "power"
        } else {
            "exponential"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialTailReport {
    /// A, units of m.
    pub a: f64,
    /// Pass when the tails are bounded by e^{−A|z|}.
    pub verdict: Verdict,
    pub fit: Option<TailFit>,
    pub reason: Option<String>,
}

/// Envelope of |values| on the outer `TAIL_FRACTION` of a window centred on
/// the midpoint: the local maxima of |values| there, so that zeros of
/// oscillating tails never enter the fit. Tails without interior maxima are
/// monotone and are used whole.
fn envelope(z: &[f64], values: &[f64]) -> Result<(f64, Vec<[f64; 2]>)> {
    if z.len() != values.len() || z.len() < 2 {
        return Err(invalid("tail samples need matching points and values"));
    }
    if z.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("tail sample points must be strictly increasing"));
    }
    let center = 0.5 * (z[0] + z[z.len() - 1]);
    let half = 0.5 * (z[z.len() - 1] - z[0]);
    let inner = half * (1.0 - TAIL_FRACTION);
    let a: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let usable = |i: usize| (z[i] - center).abs() >= inner && a[i].is_finite() && a[i] > 0.0;
    let tail: Vec<usize> = (0..z.len()).filter(|&i| usable(i)).collect();
    let maxima: Vec<usize> =
        tail.iter().copied().filter(|&i| i > 0 && i + 1 < z.len() && a[i] >= a[i - 1] && a[i] > a[i + 1]).collect();
    let picked = if maxima.len() >= 4 { maxima } else { tail };
    let mut env: Vec<[f64; 2]> = picked.iter().map(|&i| [(z[i] - center).abs(), a[i]]).collect();
    env.sort_by(|p, q| p[0].total_cmp(&q[0]));
    Ok((half, env))
}

fn fit(env: &[[f64; 2]]) -> TailFit {
    let d: Vec<f64> = env.iter().map(|p| p[0]).collect();
    let ld: Vec<f64> = d.iter().map(|x| x.ln()).collect();
    let lv: Vec<f64> = env.iter().map(|p| p[1].ln()).collect();
    let rss = |x: &[f64], s: f64| {
        let n = x.len() as f64;
        let c = (lv.iter().sum::<f64>() - s * x.iter().sum::<f64>()) / n;
        x.iter().zip(&lv).map(|(x, y)| (y - c - s * x).powi(2)).sum::<f64>()
    };
    let power = slope(&ld, &lv);
    let lin = slope(&d, &lv);
    TailFit { envelope: env.to_vec(), power, rate: -lin, power_rss: rss(&ld, power), exponential_rss: rss(&d, lin) }
}

/// Power-law exponent of the tail envelope. `None` if the window is narrower
/// than `MIN_TAIL_HALF_WIDTH`/m or holds fewer than four envelope points.
pub fn tail_exponent(z: &[f64], values: &[f64], mass: f64) -> Result<Option<TailFit>> {
    let (half, env) = envelope(z, values)?;
    if half * mass < MIN_TAIL_HALF_WIDTH || env.len() < 4 {
        return Ok(None);
    }
    Ok(Some(fit(&env)))
}

/// Tests |p₀(z)| ≤ C e^{−A|z|} on the tails. The bound holds when the fitted
/// decay rate of the envelope reaches `RATE_TOLERANCE`·A.
pub fn exponential_tail_test(z: &[f64], values: &[f64], a: f64, mass: f64) -> Result<ExponentialTailReport> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid(format!("A must be positive, got {a}")));
    }
    let (half, env) = envelope(z, values)?;
    let indeterminate =
        |reason: String| ExponentialTailReport { a, verdict: Verdict::Indeterminate, fit: None, reason: Some(reason) };
    if half * mass < MIN_TAIL_HALF_WIDTH {
        return Ok(indeterminate(format!("half-width {:.3}/m is below {MIN_TAIL_HALF_WIDTH}/m", half * mass)));
    }
    if env.len() < 4 {
        return Ok(indeterminate(format!("{} envelope samples in the tail window", env.len())));
    }
    let fit = fit(&env);
    let bounded = fit.rate >= RATE_TOLERANCE * a * mass;
    Ok(ExponentialTailReport {
        a,
        verdict: if bounded { Verdict::Pass } else { Verdict::Fail },
        fit: Some(fit),
        reason: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(half: f64) -> Vec<f64> {
        let n = (20.0 * half) as usize;
        (0..=n).map(|k| -half + 0.1 * k as f64).collect()
    }

    #[test]
    fn envelope_skips_oscillation_zeros() {
        let z = window(50.0);
        let v: Vec<f64> = z.iter().map(|z| (z * 2.0).sin() / (1.0 + z * z)).collect();
        let (_, env) = envelope(&z, &v).unwrap();
        assert!(env.iter().all(|p| p[1] > 0.0));
        let fit = tail_exponent(&z, &v, 1.0).unwrap().unwrap();
        assert!((fit.power + 2.0).abs() < 0.05, "{}", fit.power);
    }

    #[test]
    fn exact_exponential_is_bounded() {
        let z = window(45.0);
        let v: Vec<f64> = z.iter().map(|z| 3.0 * (-0.7 * z.abs()).exp()).collect();
        let r = exponential_tail_test(&z, &v, 0.7, 1.0).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.fit.unwrap().rate - 0.7).abs() < 1e-9);
    }

    #[test]
    fn narrow_window_is_indeterminate() {
        let z = window(10.0);
        let v: Vec<f64> = z.iter().map(|z| 1.0 / (1.0 + z * z)).collect();
        assert_eq!(exponential_tail_test(&z, &v, 0.5, 1.0).unwrap().verdict, Verdict::Indeterminate);
        assert!(tail_exponent(&z, &v, 1.0).unwrap().is_none());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(exponential_tail_test(&[0.0, 1.0], &[1.0, 1.0], -1.0, 1.0).is_err());
        assert!(exponential_tail_test(&[1.0, 0.0], &[1.0, 1.0], 1.0, 1.0).is_err());
    }
}
