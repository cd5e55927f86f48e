//! Deficiency solutions, self-adjoint extension spectra and eigenfunctions
//! of Q̌⁰ and Q̌³.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::acting::OperatorKind;
use crate::error::{invalid, Result};
use crate::kinematics::{Mass, MomentumPoint};
use crate::povm::PovmElementSpec;
use crate::quadrature::{integrate, integrate_semi_infinite};
use crate::states::{AmplitudeRef, FnAmplitude, PhysState, Sign, Symmetry};

/// Extension parameter φ ∈ (−π, π] of the single-particle family.
///
/// Only the slice that keeps the energy signs uncoupled is representable.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ExtensionParam(f64);

impl ExtensionParam {
    pub fn new(phi: f64) -> Result<Self> {
        if phi > -PI && phi <= PI {
            Ok(Self(phi))
        } else {
            Err(invalid(format!("extension parameter must lie in (−π, π], got {phi}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// arctan[((1 − cos φ)/sin φ) tanh(π/2)] on the principal branch.
    ///
    /// (1 − cos φ)/sin φ = tan(φ/2) is used, so φ = 0 gives 0 (the limit) and
    /// φ = π gives +π/2 (the argument tends to +∞ from φ → π⁻).
    pub fn phase_offset(self) -> f64 {
        if self.0 == PI {
            FRAC_PI_2
        } else {
            ((0.5 * self.0).tan() * (0.5 * PI).tanh()).atan()
        }
    }
}

impl TryFrom<f64> for ExtensionParam {
    type Error = crate::Error;
    fn try_from(phi: f64) -> Result<Self> {
        Self::new(phi)
    }
}

impl From<ExtensionParam> for f64 {
    fn from(p: ExtensionParam) -> f64 {
        p.0
    }
}

/// z_φⁿ = (2/mπ)(arctan[tan(φ/2) tanh(π/2)] + nπ), in units of 1/m · m.
pub fn eigenvalue(phi: ExtensionParam, n: i64, m: Mass) -> f64 {
    2.0 / (m.value() * PI) * (phi.phase_offset() + n as f64 * PI)
}

/// The eigenvalue ladder of the Q̌³ extension for n in [n_min, n_max].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionSpectrum {
    pub phi: ExtensionParam,
    pub mass: Mass,
    pub n: Vec<i64>,
    pub z: Vec<f64>,
}

impl ExtensionSpectrum {
    /// CSV with columns n, z (z in units of 1/m).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# phi,{:.16e}", self.phi.value());
        let _ = writeln!(out, "# mass,{:.16e}", self.mass.value());
        out.push_str("n,z\n");
        for (n, z) in self.n.iter().zip(&self.z) {
            let _ = writeln!(out, "{n},{:.16e}", z * self.mass.value());
        }
        out
    }
}

pub fn extension_spectrum(phi: ExtensionParam, n_min: i64, n_max: i64, m: Mass) -> Result<ExtensionSpectrum> {
    if n_min > n_max {
        return Err(invalid(format!("empty index window [{n_min}, {n_max}]")));
    }
    let n: Vec<i64> = (n_min..=n_max).collect();
    let z = n.iter().map(|&k| eigenvalue(phi, k, m)).collect();
    Ok(ExtensionSpectrum { phi, mass: m, n, z })
}

/// A solution of Q̌ψ = ±(i/m)ψ together with its norm under the marginal
/// measure of the coordinate the operator acts on.
#[derive(Debug, Clone)]
pub struct DeficiencySolution {
    pub operator: OperatorKind,
    /// +1 for eigenvalue +i/m, −1 for −i/m.
    pub eigen_sign: f64,
    /// Energy-sign component carrying the solution.
    pub component: Sign,
    pub amplitude: AmplitudeRef,
    /// ‖ψ‖² by quadrature.
    pub norm_sq: f64,
    /// ‖ψ‖² in closed form.
    pub exact_norm_sq: f64,
}

impl DeficiencySolution {
    pub fn state(&self, m: Mass) -> PhysState {
        PhysState::single(m, self.component, self.amplitude.clone())
    }
}

/// R^{±i/m}(r) = √2 e^{imτ ln(r/m)} / (r^{1/2}(E + m)) in the ± component.
fn deficiency_q0_radial(r: f64, tau: f64, m: f64) -> Complex64 {
    let e = r.hypot(m);
    Complex64::from_polar(2f64.sqrt() / (r.sqrt() * (e + m)), m * tau * (r / m).ln())
}

/// 𝒱^{±i/m}_{(ξ)}(ν) = (sec ν)^{imτ} (sec ν)^{−3/2} e^{±ξν} / √(sinh π).
fn deficiency_q3_longitudinal(nu: f64, tau: f64, a: f64, m: f64) -> Complex64 {
    let ln_sec = -nu.cos().ln();
    Complex64::from_polar((-1.5 * ln_sec + a * nu).exp() / PI.sinh().sqrt(), m * tau * ln_sec)
}

/// The deficiency solutions of Q̌⁰ (two) or Q̌³ (four).
///
/// Norms use the radial marginal m r²/E dr (Q⁰, angular part normalized
/// separately) or the ν marginal sec³ν dν (Q³).
pub fn deficiency_solutions(operator: OperatorKind, tau: f64, m: Mass) -> Result<Vec<DeficiencySolution>> {
    if !tau.is_finite() {
        return Err(invalid("τ must be finite"));
    }
    let mv = m.value();
    match operator {
        OperatorKind::Q0 => {
            let norm_sq = integrate_semi_infinite(96, mv, |r| {
                if r == 0.0 {
                    return 0.0;
                }
                mv * r * r / r.hypot(mv) * deficiency_q0_radial(r, tau, mv).norm_sqr()
            });
            Ok([(1.0, Sign::Plus), (-1.0, Sign::Minus)]
                .into_iter()
                .map(|(eigen_sign, component)| {
                    let amp = FnAmplitude::new("R", Symmetry::Spherical, move |p: &MomentumPoint, m: Mass| {
                        let (r, _, _) = p.spherical_coords(m);
                        if r == 0.0 {
                            return Complex64::new(0.0, 0.0);
                        }
                        deficiency_q0_radial(r, tau, m.value()) * (4.0 * PI).sqrt().recip()
                    });
                    DeficiencySolution {
                        operator,
                        eigen_sign,
                        component,
                        amplitude: Arc::new(amp),
                        norm_sq,
                        exact_norm_sq: 1.0,
                    }
                })
                .collect())
        }
        OperatorKind::Q3 => {
            let mut out = Vec::with_capacity(4);
            for component in [Sign::Plus, Sign::Minus] {
                for eigen_sign in [1.0, -1.0] {
                    // σ³ = ξ flips the eigenvalue, so the exponent is ±ξν.
                    let a = eigen_sign * component.factor();
                    let norm_sq = integrate(64, -FRAC_PI_2, FRAC_PI_2, |nu| {
                        nu.cos().powi(-3) * deficiency_q3_longitudinal(nu, tau, a, mv).norm_sqr()
                    });
                    let amp = FnAmplitude::new("V", Symmetry::Axial, move |p: &MomentumPoint, m: Mass| {
                        let (_, nu, _) = p.hyperbolic_coords(m);
                        deficiency_q3_longitudinal(nu, tau, a, m.value())
                    });
                    out.push(DeficiencySolution {
                        operator,
                        eigen_sign,
                        component,
                        amplitude: Arc::new(amp),
                        norm_sq,
                        exact_norm_sq: 1.0,
                    });
                }
            }
            Ok(out)
        }
        OperatorKind::Momentum(_) => Err(invalid("multiplicative operators have no deficiency subspace")),
    }
}

/// R^t_φ = √(m/2π) r^{−3/2} (r/m)^{imτ} [ (r/(E+m))^{−imt} ; e^{iφ} (r/(E+m))^{imt} ]:
/// the generalized eigenfunction of the Q̌⁰ extension with eigenvalue t
/// (angular part Y⁰⁰).
pub fn q0_extension_eigenfunction(t: f64, phi: ExtensionParam, tau: f64, m: Mass) -> Result<PhysState> {
    if !t.is_finite() || !tau.is_finite() {
        return Err(invalid("t and τ must be finite"));
    }
    let make = |sign: Sign, extra: f64| -> AmplitudeRef {
        let element = PovmElementSpec::time(t, 0, 0, sign, tau).expect("l = 0 is valid");
        Arc::new(FnAmplitude::new("R^t", Symmetry::Spherical, move |p: &MomentumPoint, m: Mass| {
            element.evaluate(p, m) * Complex64::from_polar(1.0, extra)
        }))
    };
    PhysState::new(m, Some(make(Sign::Plus, 0.0)), Some(make(Sign::Minus, phi.value())))
}

/// 𝒱^z_{(ξ);τ}(ν) = π^{−1/2} (sec ν)^{−3/2} e^{imτ ln sec ν} e^{−imξzν}, the
/// longitudinal eigenfunction of Q̌³ with eigenvalue z. With z = z_φⁿ it lies
/// in the domain of the φ-extension.
pub fn q3_longitudinal_eigenfunction(z: f64, sign: Sign, tau: f64, m: Mass) -> Result<PhysState> {
    if !z.is_finite() || !tau.is_finite() {
        return Err(invalid("z and τ must be finite"));
    }
    let xi = sign.factor();
    let amp = FnAmplitude::new("V^z", Symmetry::Axial, move |p: &MomentumPoint, m: Mass| {
        let (_, nu, _) = p.hyperbolic_coords(m);
        longitudinal_mode(nu, z, xi, tau, m.value())
    });
    Ok(PhysState::single(m, sign, Arc::new(amp)))
}

/// π^{−1/2} (sec ν)^{−3/2} e^{imτ ln sec ν} e^{−imξzν}.
pub(crate) fn longitudinal_mode(nu: f64, z: f64, xi: f64, tau: f64, m: f64) -> Complex64 {
    let ln_sec = -nu.cos().ln();
    Complex64::from_polar((-1.5 * ln_sec).exp() / PI.sqrt(), m * (tau * ln_sec - xi * z * nu))
}

/// Time-POVM element ψ^{t,l,m_z}_{τ;ξ} (generalized eigenfunction of Q̌⁰).
pub fn q0_eigenfunction(t: f64, l: u32, m_z: i32, sign: Sign, tau: f64) -> Result<PovmElementSpec> {
    PovmElementSpec::time(t, l, m_z, sign, tau)
}

/// Position-POVM element ψ^{z,Λ,m_z}_{τ;ξ} (generalized eigenfunction of Q̌³).
pub fn q3_eigenfunction(z: f64, lambda: f64, m_z: i32, sign: Sign, tau: f64) -> Result<PovmElementSpec> {
    PovmElementSpec::position(z, lambda, m_z, sign, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parameter_range() {
        assert!(ExtensionParam::new(-PI).is_err());
        assert!(ExtensionParam::new(PI).is_ok());
        assert!(ExtensionParam::new(3.2).is_err());
        assert!(ExtensionParam::new(f64::NAN).is_err());
    }

    #[test]
    fn special_values() {
        let m = Mass::new(2.0).unwrap();
        let at = |phi: f64, n| eigenvalue(ExtensionParam::new(phi).unwrap(), n, m);
        for n in -3..=3 {
            assert_relative_eq!(at(PI, n), (2 * n + 1) as f64 / 2.0, max_relative = 1e-15);
            assert_relative_eq!(at(0.0, n), n as f64, max_relative = 1e-15);
        }
        let z0 = at(FRAC_PI_2, 0);
        assert_relative_eq!(z0, (0.5 * PI).tanh().atan() / PI, max_relative = 1e-15);
    }

    #[test]
    fn empty_window_rejected() {
        assert!(extension_spectrum(ExtensionParam::new(0.0).unwrap(), 2, 1, Mass::default()).is_err());
    }

    #[test]
    fn deficiency_counts_and_norms() {
        let m = Mass::new(1.3).unwrap();
        let q0 = deficiency_solutions(OperatorKind::Q0, 0.7, m).unwrap();
        let q3 = deficiency_solutions(OperatorKind::Q3, 0.7, m).unwrap();
        assert_eq!((q0.len(), q3.len()), (2, 4));
        for d in q0.iter().chain(&q3) {
            assert!((d.norm_sq - 1.0).abs() < 1e-10, "{:?} {}", d.operator, d.norm_sq);
        }
    }
}
