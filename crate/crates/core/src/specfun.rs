//! Special functions used by the eigenfunction formulas.
//!
//! * `gamma_abs_half`: |Γ(1/2 + μ + iΛ)| via the reflection identity
//!   |Γ(1/2 + iΛ)|² = π / cosh(πΛ) and the recurrence Γ(z + 1) = z Γ(z).
//! * `conical_p`: the conical (Mehler) function P^{-μ}_{-1/2+iΛ}(x), x ≥ 1.
//!   Near x = 1 it sums the Gauss hypergeometric series; elsewhere it
//!   integrates the Mehler–Dirichlet representation
//!
//!   P^{-μ}_{-1/2+iΛ}(cosh ω) = √(2/π) / Γ(μ + 1/2) · (sinh ω)^{-μ} · ∫₀^ω cos(Λt) (cosh ω − cosh t)^{μ − 1/2} dt
//!
//!   with the substitution t = ω sin θ, which removes the endpoint
//!   singularity and leaves an analytic integrand for Gauss–Legendre panels.
//!   The accuracy target is 1e-10 relative to the integral of the absolute
//!   integrand, which bounds the result.
//! * `spherical_harmonic`: orthonormal harmonics with the Condon–Shortley phase.
//! * `sinc`: the unnormalized sin(x)/x.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature;

/// Arguments of the conical function P^{-μ}_{-1/2+iΛ}(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicalArgs {
    pub mu: u32,
    pub lambda: f64,
    pub x: f64,
}

impl ConicalArgs {
    pub fn new(mu: u32, lambda: f64, x: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("conical degree parameter must be >= 0, got {lambda}")));
        }
        if !(x >= 1.0 && x.is_finite()) {
            return Err(invalid(format!("conical argument must be >= 1, got {x}")));
        }
        Ok(Self { mu, lambda, x })
    }

    /// Arguments at x = cosh(omega).
    pub fn at_rapidity(mu: u32, lambda: f64, omega: f64) -> Result<Self> {
        if !(omega >= 0.0) {
            return Err(invalid(format!("rapidity must be >= 0, got {omega}")));
        }
        Self::new(mu, lambda, omega.cosh())
    }
}

/// |Γ(1/2 + iΛ)| without forming cosh(πΛ), which overflows for large Λ.
fn gamma_abs_half_base(lambda: f64) -> f64 {
    let e = (-PI * lambda).exp();
    (2.0 * PI).sqrt() * (-0.5 * PI * lambda).exp() / (1.0 + e * e).sqrt()
}

/// Π_{k<μ} |k + 1/2 + iΛ|.
fn pochhammer_abs(mu: u32, lambda: f64) -> f64 {
    (0..mu).map(|k| (k as f64 + 0.5).hypot(lambda)).product()
}

/// |Γ(1/2 + μ + iΛ)| for integer μ ≥ 0 and Λ ≥ 0.
pub fn gamma_abs_half(mu: u32, lambda: f64) -> f64 {
    gamma_abs_half_base(lambda) * pochhammer_abs(mu, lambda)
}

/// √(sinh πΛ) · |Γ(1/2 + μ + iΛ)|, the Λ-dependent part of the transverse
/// normalization, evaluated as √(π tanh πΛ) · Π_{k<μ}|k + 1/2 + iΛ|.
pub fn conical_weight(mu: u32, lambda: f64) -> f64 {
    (PI * (PI * lambda).tanh()).sqrt() * pochhammer_abs(mu, lambda)
}

/// Γ(μ + 1/2) for integer μ.
fn gamma_half_integer(mu: u32) -> f64 {
    (0..mu).fold(PI.sqrt(), |g, k| g * (k as f64 + 0.5))
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |f, k| f * k as f64)
}

// Series is used only where its terms cannot grow large.
const SERIES_MAX_X: f64 = 1.5;
const SERIES_MAX_GROWTH: f64 = 2.0;
const CONICAL_REL_TOL: f64 = 1e-12;
const CONICAL_ACCEPT_TOL: f64 = 1e-9;
const CONICAL_MAX_PANELS: usize = 1 << 12;

/// P^{-μ}_{-1/2+iΛ}(x).
pub fn conical_p(args: &ConicalArgs) -> Result<f64> {
    let ConicalArgs { mu, lambda, x } = *args;
    if !(lambda >= 0.0) || !(x >= 1.0) || !x.is_finite() {
        return Err(invalid(format!("conical arguments out of domain: {args:?}")));
    }
    if x == 1.0 {
        return Ok(if mu == 0 { 1.0 } else { 0.0 });
    }
    let y = 0.5 * (1.0 - x);
    if x <= SERIES_MAX_X && (lambda * lambda + 0.25) * y.abs() <= SERIES_MAX_GROWTH {
        return Ok(conical_p_series(mu, lambda, x));
    }
    conical_p_quadrature(mu, lambda, x)
}

/// Hypergeometric form
/// P^{-μ}_ν(x) = ((x−1)/(x+1))^{μ/2} / μ! · ₂F₁(−ν, ν+1; μ+1; (1−x)/2),
/// whose coefficients are real on the conical line.
pub(crate) fn conical_p_series(mu: u32, lambda: f64, x: f64) -> f64 {
    let y = 0.5 * (1.0 - x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..400 {
        let kf = k as f64;
        term *= ((kf + 0.5) * (kf + 0.5) + lambda * lambda) / ((kf + 1.0 + mu as f64) * (kf + 1.0)) * y;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    ((x - 1.0) / (x + 1.0)).powf(0.5 * mu as f64) / factorial(mu) * sum
}

pub(crate) fn conical_p_quadrature(mu: u32, lambda: f64, x: f64) -> Result<f64> {
    let omega = x.acosh();
    let sinh_omega = omega.sinh();
    let half_mu = mu as f64;
    // Integrand in θ with t = ω sin θ; the (sinh ω)^{-μ} prefactor is folded
    // in as ((cosh ω − cosh t)/sinh ω)^μ, which stays below 1.
    let integrand = |theta: f64| -> (f64, f64) {
        let t = omega * theta.sin();
        // cosh ω − cosh t = 2 sinh((ω+t)/2) sinh((ω−t)/2), and
        // ω − t = 2ω sin²(π/4 − θ/2) avoids cancellation near θ = π/2.
        let s = (0.25 * PI - 0.5 * theta).sin();
        let gap = 2.0 * omega * s * s;
        let diff = 2.0 * (0.5 * (omega + t)).sinh() * (0.5 * gap).sinh();
        if diff <= 0.0 {
            return (0.0, 0.0);
        }
        let jac = omega * theta.cos();
        let weight = (diff / sinh_omega).powf(half_mu) / diff.sqrt() * jac;
        ((lambda * t).cos() * weight, weight.abs())
    };

    let base_panels = 1 + (lambda * omega / 4.0).ceil() as usize;
    let eval = |panels: usize| -> (f64, f64) {
        let mut acc = 0.0;
        let mut abs = 0.0;
        let h = FRAC_PI_2 / panels as f64;
        for p in 0..panels {
            let lo = h * p as f64;
            let rule = quadrature::legendre_rule(32);
            let half = 0.5 * h;
            let mid = lo + half;
            for &(node, w) in rule.iter() {
                let (v, a) = integrand(mid + half * node);
                acc += w * half * v;
                abs += w * half * a;
            }
        }
        (acc, abs)
    };

    let mut panels = base_panels;
    let (mut prev, scale) = eval(panels);
    let prefactor = (2.0 / PI).sqrt() / gamma_half_integer(mu);
    loop {
        panels *= 2;
        let (next, _) = eval(panels);
        let diff = (next - prev).abs();
        if diff <= CONICAL_REL_TOL * scale {
            return Ok(prefactor * next);
        }
        if panels >= CONICAL_MAX_PANELS {
            if diff <= CONICAL_ACCEPT_TOL * scale {
                return Ok(prefactor * next);
            }
            return Err(Error::NonConvergence {
                what: format!("conical function P^-{mu}_(-1/2+i{lambda})({x})"),
                residual: prefactor * diff,
            });
        }
        prev = next;
    }
}

/// Orthonormal associated Legendre factors N_l^m P_l^m(x) for 0 ≤ m ≤ l ≤ l_max,
/// Condon–Shortley phase included, so that Y_l^m = table[l][m] e^{imφ}.
pub fn legendre_table(l_max: usize, x: f64) -> Vec<Vec<f64>> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut table: Vec<Vec<f64>> = (0..=l_max).map(|l| vec![0.0; l + 1]).collect();
    // Diagonal: P̄_m^m = (−1)^m √((2m+1)/(4π) Π_{k≤m} (2k−1)/(2k)) s^m
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            pmm *= -s * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
        }
        table[m][m] = pmm;
        if m < l_max {
            table[m + 1][m] = x * (2.0 * m as f64 + 3.0).sqrt() * pmm;
        }
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            table[l][m] = a * (x * table[l - 1][m] - b * table[l - 2][m]);
        }
    }
    table
}

/// Y^{l,m}(θ, φ), orthonormal on the unit sphere.
pub fn spherical_harmonic(l: u32, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() > l {
        return Err(invalid(format!("|m_z| = {} exceeds l = {l}", m.abs())));
    }
    let table = legendre_table(l as usize, theta.cos());
    let am = m.unsigned_abs() as usize;
    let positive = table[l as usize][am] * Complex64::from_polar(1.0, am as f64 * phi);
    Ok(if m >= 0 {
        positive
    } else if am.is_multiple_of(2) {
        positive.conj()
    } else {
        -positive.conj()
    })
}

/// sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_at_half_integers() {
        assert_relative_eq!(gamma_abs_half(0, 0.0), PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_abs_half(1, 0.0), PI.sqrt() / 2.0, max_relative = 1e-15);
        assert_relative_eq!(gamma_abs_half(3, 0.0), 15.0 * PI.sqrt() / 8.0, max_relative = 1e-14);
    }

    #[test]
    fn gamma_reflection_identity() {
        for lam in [0.0, 0.5, 1.0, 2.0] {
            let g = gamma_abs_half(0, lam);
            assert_relative_eq!(g * g * (PI * lam).cosh() / PI, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn gamma_decreases_in_lambda() {
        for mu in 0..4 {
            let mut prev = f64::INFINITY;
            for k in 0..200 {
                let g = gamma_abs_half(mu, 0.05 * k as f64);
                assert!(g > 0.0 && g < prev);
                prev = g;
            }
        }
    }

    #[test]
    fn gamma_survives_large_lambda() {
        let g = gamma_abs_half(2, 300.0);
        assert!(g > 0.0 && g.is_finite());
    }

    #[test]
    fn conical_weight_matches_definition() {
        for (mu, lam) in [(0, 0.3), (1, 1.2), (3, 2.5)] {
            let direct = ((PI * lam).sinh()).sqrt() * gamma_abs_half(mu, lam);
            assert_relative_eq!(conical_weight(mu, lam), direct, max_relative = 1e-13);
        }
    }

    #[test]
    fn conical_at_unit_argument() {
        assert_eq!(conical_p(&ConicalArgs::new(0, 0.7, 1.0).unwrap()).unwrap(), 1.0);
        assert_eq!(conical_p(&ConicalArgs::new(2, 0.7, 1.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn series_and_quadrature_agree_in_overlap_region() {
        for mu in 0..4 {
            for lam in [0.0, 0.4, 1.3, 2.0] {
                for x in [1.05, 1.2, 1.4, 1.5] {
                    let s = conical_p_series(mu, lam, x);
                    let q = conical_p_quadrature(mu, lam, x).unwrap();
                    assert!((s - q).abs() < 1e-11, "mu={mu} lam={lam} x={x}: {s} vs {q}");
                }
            }
        }
    }

    #[test]
    fn conical_at_lambda_zero_mu_zero_matches_elliptic_form() {
        // P_{-1/2}(cosh ω) = (2/π) sech(ω/2) K(tanh(ω/2)), K by AGM.
        let omega: f64 = 2.0;
        let k = (0.5 * omega).tanh();
        let (mut a, mut b) = (1.0_f64, (1.0 - k * k).sqrt());
        for _ in 0..30 {
            let an = 0.5 * (a + b);
            b = (a * b).sqrt();
            a = an;
        }
        let kk = PI / (2.0 * a);
        let expected = 2.0 / PI / (0.5 * omega).cosh() * kk;
        let got = conical_p(&ConicalArgs::at_rapidity(0, 0.0, omega).unwrap()).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-11);
    }

    #[test]
    fn conical_rejects_bad_domain() {
        assert!(ConicalArgs::new(0, -1.0, 2.0).is_err());
        assert!(ConicalArgs::new(0, 1.0, 0.5).is_err());
        assert!(ConicalArgs::new(0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn conical_large_argument_is_finite_and_decays() {
        let near = conical_p(&ConicalArgs::at_rapidity(0, 0.0, 10.0).unwrap()).unwrap();
        let far = conical_p(&ConicalArgs::at_rapidity(0, 0.0, 30.0).unwrap()).unwrap();
        assert!(near > far && far > 0.0);
        for mu in 0..5 {
            let v = conical_p(&ConicalArgs::at_rapidity(mu, 6.0, 25.0).unwrap()).unwrap();
            assert!(v.is_finite() && v.abs() < 1.0);
        }
    }

    #[test]
    fn harmonics_low_orders() {
        let y00 = spherical_harmonic(0, 0, 0.3, 1.1).unwrap();
        assert_relative_eq!(y00.re, 1.0 / (4.0 * PI).sqrt(), max_relative = 1e-15);
        let th = 0.7;
        let y10 = spherical_harmonic(1, 0, th, 2.0).unwrap();
        assert_relative_eq!(y10.re, (3.0 / (4.0 * PI)).sqrt() * th.cos(), max_relative = 1e-14);
        // Condon–Shortley: Y_1^1 = −√(3/8π) sin θ e^{iφ}
        let y11 = spherical_harmonic(1, 1, th, 0.0).unwrap();
        assert_relative_eq!(y11.re, -(3.0 / (8.0 * PI)).sqrt() * th.sin(), max_relative = 1e-14);
        let y1m1 = spherical_harmonic(1, -1, th, 0.0).unwrap();
        assert_relative_eq!(y1m1.re, (3.0 / (8.0 * PI)).sqrt() * th.sin(), max_relative = 1e-14);
        assert!(spherical_harmonic(1, 2, 0.0, 0.0).is_err());
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(PI).abs() < 1e-15);
        assert_relative_eq!(sinc(FRAC_PI_2), 2.0 / PI, max_relative = 1e-15);
        // continuous across the series switch
        assert_relative_eq!(sinc(1e-4 * 0.999), sinc(1e-4 * 1.001), max_relative = 1e-9);
    }
}
