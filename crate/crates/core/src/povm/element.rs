use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kinematics::{Mass, MomentumPoint};
use crate::specfun::{conical_p, conical_weight, spherical_harmonic, ConicalArgs};
use crate::states::{Amplitude, PhysState, Sign, Symmetry};

/// Quantum numbers of a POVM element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ElementLabel {
    Time { t: f64, l: u32, m_z: i32 },
    Position { z: f64, lambda: f64, m_z: i32 },
}

/// A time or position POVM element ψ_{τ;ξ}, usable as an amplitude evaluator.
///
/// Time: √(m/2π) Y^{l,m_z}(Ω) r^{−3/2} (r/m)^{imτ} (r/(E+m))^{∓imt}.
/// Position: √(sinh πΛ)|Γ(1/2+|m_z|+iΛ)| / (2(mπ)^{3/2}) · e^{imτ ln sec ν}
/// e^{−imξzν} e^{i m_z φ} (sec ν)^{−3/2} P^{−|m_z|}_{−1/2+iΛ}(cosh ω).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PovmElementSpec {
    pub label: ElementLabel,
    pub sign: Sign,
    pub tau: f64,
}

impl PovmElementSpec {
    pub fn time(t: f64, l: u32, m_z: i32, sign: Sign, tau: f64) -> Result<Self> {
        if m_z.unsigned_abs() > l {
            return Err(invalid(format!("|m_z| = {} exceeds l = {l}", m_z.abs())));
        }
        if !t.is_finite() || !tau.is_finite() {
            return Err(invalid("t and τ must be finite"));
        }
        Ok(Self { label: ElementLabel::Time { t, l, m_z }, sign, tau })
    }

    pub fn position(z: f64, lambda: f64, m_z: i32, sign: Sign, tau: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("Λ must be non-negative and finite, got {lambda}")));
        }
        if !z.is_finite() || !tau.is_finite() {
            return Err(invalid("z and τ must be finite"));
        }
        Ok(Self { label: ElementLabel::Position { z, lambda, m_z }, sign, tau })
    }

    /// The radial factor of a time element, √(m/2π) r^{−3/2} (r/m)^{imτ}
    /// (r/(E+m))^{∓imt}; zero at r = 0.
    pub fn time_radial(&self, r: f64, m: Mass) -> Complex64 {
        let ElementLabel::Time { t, .. } = self.label else {
            return Complex64::new(0.0, 0.0);
        };
        if r <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mv = m.value();
        let u = (r / (r.hypot(mv) + mv)).ln();
        let phase = mv * self.tau * (r / mv).ln() - self.sign.factor() * mv * t * u;
        Complex64::from_polar((mv / (2.0 * PI)).sqrt() * r.powf(-1.5), phase)
    }

    /// The ω-independent prefactor of a position element,
    /// √(sinh πΛ)|Γ(1/2+μ+iΛ)| / (2(mπ)^{3/2}).
    pub fn position_prefactor(lambda: f64, mu: u32, m: Mass) -> f64 {
        conical_weight(mu, lambda) / (2.0 * (m.value() * PI).powf(1.5))
    }

    /// The element at a momentum point. Conical-function failures give NaN.
    pub fn evaluate(&self, p: &MomentumPoint, m: Mass) -> Complex64 {
        match self.label {
            ElementLabel::Time { l, m_z, .. } => {
                let (r, theta, phi) = p.spherical_coords(m);
                let y = spherical_harmonic(l, m_z, theta, phi).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                y * self.time_radial(r, m)
            }
            ElementLabel::Position { z, lambda, m_z } => {
                let (omega, nu, phi) = p.hyperbolic_coords(m);
                let mv = m.value();
                let mu = m_z.unsigned_abs();
                let ln_sec = -nu.cos().ln();
                let conical =
                    ConicalArgs::at_rapidity(mu, lambda, omega).and_then(|a| conical_p(&a)).unwrap_or(f64::NAN);
                let modulus = Self::position_prefactor(lambda, mu, m) * (-1.5 * ln_sec).exp() * conical;
                let phase = mv * self.tau * ln_sec - self.sign.factor() * mv * z * nu + m_z as f64 * phi;
                Complex64::from_polar(modulus, phase)
            }
        }
    }

    /// The element as a (non-normalizable) single-sign state.
    pub fn as_state(&self, m: Mass) -> PhysState {
        PhysState::single(m, self.sign, std::sync::Arc::new(*self))
    }
}

impl Amplitude for PovmElementSpec {
    fn eval(&self, p: &MomentumPoint, m: Mass) -> Complex64 {
        self.evaluate(p, m)
    }

    fn symmetry(&self) -> Symmetry {
        match self.label {
            ElementLabel::Time { l: 0, .. } => Symmetry::Spherical,
            ElementLabel::Time { m_z: 0, .. } | ElementLabel::Position { m_z: 0, .. } => Symmetry::Axial,
            _ => Symmetry::None,
        }
    }
}
