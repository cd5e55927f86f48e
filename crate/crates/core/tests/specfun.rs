mod common;

use std::f64::consts::PI;

use common::simpson;
use propertime::specfun::{conical_p, gamma_abs_half, sinc, spherical_harmonic, ConicalArgs};
use proptest::prelude::*;

#[test]
fn gamma_at_half_integers() {
    assert!((gamma_abs_half(0, 0.0) - PI.sqrt()).abs() < 1e-14);
    assert!((gamma_abs_half(1, 0.0) - 0.5 * PI.sqrt()).abs() < 1e-14);
    assert!((gamma_abs_half(2, 0.0) - 0.75 * PI.sqrt()).abs() < 1e-14);
}

#[test]
fn conical_at_unit_argument() {
    for lambda in [0.0, 0.7, 5.0] {
        assert_eq!(conical_p(&ConicalArgs::new(0, lambda, 1.0).unwrap()).unwrap(), 1.0);
        for mu in 1..4 {
            assert_eq!(conical_p(&ConicalArgs::new(mu, lambda, 1.0).unwrap()).unwrap(), 0.0);
        }
    }
}

/// (2/π) ∫₀^ω cos(Λt)/√(2cosh ω − 2cosh t) dt with t = ω − u², which
/// leaves a bounded integrand on u ∈ [0, √ω].
fn mehler_oracle(lambda: f64, omega: f64) -> f64 {
    let top = omega.sqrt();
    (2.0 / PI)
        * simpson(0.0, top, 4000, |u| {
            let t = omega - u * u;
            let d = 2.0 * omega.cosh() - 2.0 * t.cosh();
            if u == 0.0 {
                2.0 * (lambda * omega).cos() / (2.0 * omega.sinh()).sqrt()
            } else {
                2.0 * u * (lambda * t).cos() / d.sqrt()
            }
        })
}

#[test]
fn conical_matches_mehler_dirichlet() {
    for (lambda, omega) in [(0.5, 1.0), (0.0, 0.3), (2.0, 2.5), (4.0, 0.9)] {
        let got = conical_p(&ConicalArgs::at_rapidity(0, lambda, omega).unwrap()).unwrap();
        let oracle = mehler_oracle(lambda, omega);
        assert!((got - oracle).abs() < 1e-8, "Λ = {lambda}, ω = {omega}: {got} vs {oracle}");
    }
}

#[test]
fn conical_rejects_out_of_domain() {
    assert!(ConicalArgs::new(0, -1.0, 2.0).is_err());
    assert!(ConicalArgs::new(0, 1.0, 0.5).is_err());
    assert!(ConicalArgs::at_rapidity(0, 1.0, -0.1).is_err());
}

#[test]
fn low_harmonics() {
    let y00 = spherical_harmonic(0, 0, 0.4, 1.1).unwrap();
    assert!((y00.re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15 && y00.im == 0.0);
    for theta in [0.0, 0.9, 2.0] {
        let y10 = spherical_harmonic(1, 0, theta, 0.3).unwrap();
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt() * theta.cos()).abs() < 1e-15);
    }
    assert!(spherical_harmonic(1, 2, 0.1, 0.1).is_err());
}

#[test]
fn harmonic_inner_products() {
    // Midpoint in θ and periodic trapezoid in φ, exact enough for l ≤ 3.
    let (nt, np) = (400, 16);
    let modes: Vec<(u32, i32)> = (0..=3).flat_map(|l| (-(l as i32)..=l as i32).map(move |m| (l, m))).collect();
    for &(l1, m1) in &modes {
        for &(l2, m2) in &modes {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for i in 0..nt {
                let th = PI * (i as f64 + 0.5) / nt as f64;
                for j in 0..np {
                    let ph = 2.0 * PI * j as f64 / np as f64;
                    let a = spherical_harmonic(l1, m1, th, ph).unwrap();
                    let b = spherical_harmonic(l2, m2, th, ph).unwrap();
                    acc += a.conj() * b * th.sin() * (PI / nt as f64) * (2.0 * PI / np as f64);
                }
            }
            let expected = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
            assert!((acc.re - expected).abs() < 1e-4 && acc.im.abs() < 1e-10, "({l1},{m1}) ({l2},{m2}): {acc}");
        }
    }
}

#[test]
fn sinc_values() {
    assert_eq!(sinc(0.0), 1.0);
    assert!(sinc(PI).abs() < 1e-15);
    assert!((sinc(0.5 * PI) - 2.0 / PI).abs() < 1e-15);
}

proptest! {
    #[test]
    fn gamma_reflection(lambda in 0.0..8.0f64) {
        let g = gamma_abs_half(0, lambda);
        let rhs = PI / (PI * lambda).cosh();
        prop_assert!((g * g - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn gamma_recurrence(lambda in 0.0..6.0f64, mu in 0u32..5) {
        let ratio = gamma_abs_half(mu + 1, lambda) / gamma_abs_half(mu, lambda);
        prop_assert!((ratio - (mu as f64 + 0.5).hypot(lambda)).abs() < 1e-10 * ratio);
    }

    #[test]
    fn sinc_is_even_and_bounded(x in -50.0..50.0f64) {
        prop_assert_eq!(sinc(x), sinc(-x));
        prop_assert!(sinc(x).abs() <= 1.0);
        if x.abs() > 1e-3 {
            prop_assert!((sinc(x) - x.sin() / x).abs() < 1e-15);
        }
    }

    #[test]
    fn harmonic_conjugation(l in 0u32..6, m in -5i32..=5, theta in 0.0..PI, phi in 0.0..(2.0 * PI)) {
        prop_assume!(m.unsigned_abs() <= l);
        let a = spherical_harmonic(l, -m, theta, phi).unwrap();
        let b = spherical_harmonic(l, m, theta, phi).unwrap().conj() * if m % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((a - b).norm() < 1e-12);
    }
}
