//! One-dimensional quadrature rules shared by the grids, special functions
//! and the POVM pairings.
//!
//! Gauss–Legendre nodes come from `gauss-quad` and are cached per degree.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

use crate::error::{invalid, Result};

type Rule = Arc<Vec<(f64, f64)>>;

/// Gauss–Legendre node/weight pairs on [-1, 1], cached by degree.
pub fn legendre_rule(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("quadrature cache poisoned").get(&n) {
        return Arc::clone(rule);
    }
    let degree = NonZeroUsize::new(n.max(1)).expect("nonzero degree");
    let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(degree).as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rule = Arc::new(pairs);
    cache.lock().expect("quadrature cache poisoned").insert(n, Arc::clone(&rule));
    rule
}

/// Gauss–Legendre nodes and weights mapped affinely onto [a, b], ascending.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let rule = legendre_rule(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.iter().map(|&(x, w)| (mid + half * x, half * w)).unzip()
}

/// Integrate `f` over [a, b] with an n-point Gauss–Legendre rule.
pub fn integrate<F: FnMut(f64) -> f64>(n: usize, a: f64, b: f64, mut f: F) -> f64 {
    let rule = legendre_rule(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    // Fixed summation order keeps results bit-reproducible.
    rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Composite Gauss–Legendre over `panels` equal sub-intervals of [a, b].
pub fn integrate_composite<F: FnMut(f64) -> f64>(n: usize, panels: usize, a: f64, b: f64, mut f: F) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + h * p as f64;
            integrate(n, lo, lo + h, &mut f)
        })
        .sum()
}

/// Integrate over [a, b] doubling the panel count until successive estimates
/// agree to `rel_tol` relative to `scale` (or to the estimate itself when
/// `scale` is zero). Returns the estimate and the last difference.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    rel_tol: f64,
    max_panels: usize,
    mut f: F,
) -> (f64, f64) {
    const NODES: usize = 24;
    let mut panels = 1;
    let mut prev = integrate_composite(NODES, panels, a, b, &mut f);
    loop {
        panels *= 2;
        let next = integrate_composite(NODES, panels, a, b, &mut f);
        let diff = (next - prev).abs();
        if diff <= rel_tol * next.abs().max(f64::MIN_POSITIVE) || panels >= max_panels {
            return (next, diff);
        }
        prev = next;
    }
}

/// Equally spaced periodic nodes on [0, period) with equal weights
/// (trapezoid rule, exact for trigonometric polynomials of degree < n).
pub fn periodic_trapezoid(n: usize, period: f64) -> (Vec<f64>, Vec<f64>) {
    let h = period / n as f64;
    ((0..n).map(|k| h * k as f64).collect(), vec![h; n])
}

/// Trapezoid weights for arbitrary ascending sample points.
pub fn trapezoid_weights(points: &[f64]) -> Result<Vec<f64>> {
    if points.len() < 2 {
        return Err(invalid("trapezoid rule needs at least two points"));
    }
    if points.windows(2).any(|w| w[1] <= w[0] || !w[1].is_finite()) {
        return Err(invalid("sample points must be finite and strictly ascending"));
    }
    let n = points.len();
    let mut w = vec![0.0; n];
    for k in 0..n - 1 {
        let h = 0.5 * (points[k + 1] - points[k]);
        w[k] += h;
        w[k + 1] += h;
    }
    Ok(w)
}

/// Integral of `f` over [0, inf) through the map x = scale * s / (1 - s),
/// which is analytic for integrands with algebraic decay.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(n: usize, scale: f64, mut f: F) -> f64 {
    integrate(n, 0.0, 1.0, |s| {
        let one_minus = 1.0 - s;
        let x = scale * s / one_minus;
        f(x) * scale / (one_minus * one_minus)
    })
}

/// Neumaier-compensated sum, used where many terms of mixed sign meet.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            c += (sum - s) + t;
        } else {
            c += (t - s) + sum;
        }
        sum = s;
    }
    sum + c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let v = integrate(8, -1.0, 2.0, |x| x.powi(15) - 3.0 * x.powi(4));
        let exact = (2f64.powi(16) - 1.0) / 16.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert_relative_eq!(v, exact, max_relative = 1e-13);
    }

    #[test]
    fn nodes_are_sorted_and_weights_positive() {
        let (x, w) = gauss_legendre(33, 0.0, 3.0);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        assert!(w.iter().all(|&v| v > 0.0));
        assert_relative_eq!(w.iter().sum::<f64>(), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn semi_infinite_map_handles_algebraic_tails() {
        // \int_0^\infty dx / (1 + x)^2 = 1
        let v = integrate_semi_infinite(40, 1.0, |x| 1.0 / ((1.0 + x) * (1.0 + x)));
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn periodic_rule_is_exact_for_trig_polynomials() {
        let (x, w) = periodic_trapezoid(16, std::f64::consts::TAU);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * (3.0 * x).cos().powi(2)).sum();
        assert_relative_eq!(v, std::f64::consts::PI, max_relative = 1e-14);
    }

    #[test]
    fn trapezoid_weights_reject_bad_points() {
        assert!(trapezoid_weights(&[0.0]).is_err());
        assert!(trapezoid_weights(&[0.0, 0.0, 1.0]).is_err());
        let w = trapezoid_weights(&[0.0, 1.0, 3.0]).unwrap();
        assert_eq!(w, vec![0.5, 1.5, 1.0]);
    }

    #[test]
    fn adaptive_rule_converges_on_oscillatory_integrand() {
        let (v, err) = integrate_adaptive(0.0, 40.0, 1e-12, 1 << 10, |x| (7.0 * x).cos());
        assert_relative_eq!(v, (280.0f64).sin() / 7.0, max_relative = 1e-10);
        assert!(err < 1e-10);
    }
}
