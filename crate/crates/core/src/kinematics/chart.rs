//! Momentum-space charts and the invariant measure dμ(π) = m d³π / E_π.
//!
//! Hyperbolic chart: π¹ = m sinh ω sec ν cos φ, π² = m sinh ω sec ν sin φ,
//! π³ = m tan ν. In these coordinates E = m sec ν cosh ω and the invariant
//! measure factorizes as m³ (sinh ω dω dφ)(sec³ν dν).

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Particle mass; the only scale. Lengths and times are in units of 1/m.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Mass(f64);

impl Mass {
    pub fn new(m: f64) -> Result<Self> {
        if m > 0.0 && m.is_finite() {
            Ok(Self(m))
        } else {
            Err(invalid(format!("mass must be positive and finite, got {m}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The reduced Compton length 1/m.
    pub fn compton_length(self) -> f64 {
        1.0 / self.0
    }
}

impl Default for Mass {
    fn default() -> Self {
        Self(1.0)
    }
}

impl TryFrom<f64> for Mass {
    type Error = Error;
    fn try_from(m: f64) -> Result<Self> {
        Self::new(m)
    }
}

impl From<Mass> for f64 {
    fn from(m: Mass) -> f64 {
        m.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Cartesian,
    Spherical,
    Hyperbolic,
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChartKind::Cartesian => "cartesian",
            ChartKind::Spherical => "spherical",
            ChartKind::Hyperbolic => "hyperbolic",
        })
    }
}

/// A point on the mass shell, labelled by its spatial momentum in one chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "lowercase")]
pub enum MomentumPoint {
    Cartesian { p: [f64; 3] },
    Spherical { r: f64, theta: f64, phi: f64 },
    Hyperbolic { omega: f64, nu: f64, phi: f64 },
}

fn azimuth(x: f64, y: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        return 0.0;
    }
    let a = y.atan2(x);
    let a = if a < 0.0 { a + TAU } else { a };
    // atan2 may round to exactly 2π for tiny negative y.
    if a >= TAU {
        0.0
    } else {
        a
    }
}

impl MomentumPoint {
    pub fn cartesian(p: [f64; 3]) -> Self {
        Self::Cartesian { p }
    }

    pub fn spherical(r: f64, theta: f64, phi: f64) -> Result<Self> {
        let pt = Self::Spherical { r, theta, phi };
        pt.validate()?;
        Ok(pt)
    }

    pub fn hyperbolic(omega: f64, nu: f64, phi: f64) -> Result<Self> {
        let pt = Self::Hyperbolic { omega, nu, phi };
        pt.validate()?;
        Ok(pt)
    }

    pub fn chart(&self) -> ChartKind {
        match self {
            Self::Cartesian { .. } => ChartKind::Cartesian,
            Self::Spherical { .. } => ChartKind::Spherical,
            Self::Hyperbolic { .. } => ChartKind::Hyperbolic,
        }
    }

    /// Checks the chart ranges.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Cartesian { p } => p.iter().all(|c| c.is_finite()),
            Self::Spherical { r, theta, phi } => {
                r >= 0.0 && r.is_finite() && (0.0..=PI).contains(&theta) && (0.0..TAU).contains(&phi)
            }
            Self::Hyperbolic { omega, nu, phi } => {
                omega >= 0.0 && omega.is_finite() && nu.abs() < FRAC_PI_2 && (0.0..TAU).contains(&phi)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("{self:?}")))
        }
    }

    /// Cartesian components of the spatial momentum.
    pub fn to_cartesian(&self, m: Mass) -> [f64; 3] {
        match *self {
            Self::Cartesian { p } => p,
            Self::Spherical { r, theta, phi } => {
                let (st, ct) = theta.sin_cos();
                let (sp, cp) = phi.sin_cos();
                [r * st * cp, r * st * sp, r * ct]
            }
            Self::Hyperbolic { omega, nu, phi } => {
                let rho = m.value() * omega.sinh() / nu.cos();
                let (sp, cp) = phi.sin_cos();
                [rho * cp, rho * sp, m.value() * nu.tan()]
            }
        }
    }

    fn from_cartesian(p: [f64; 3], target: ChartKind, m: Mass) -> Self {
        match target {
            ChartKind::Cartesian => Self::Cartesian { p },
            ChartKind::Spherical => {
                let rho = p[0].hypot(p[1]);
                let r = rho.hypot(p[2]);
                let theta = if r == 0.0 { 0.0 } else { rho.atan2(p[2]) };
                Self::Spherical { r, theta, phi: azimuth(p[0], p[1]) }
            }
            ChartKind::Hyperbolic => {
                let nu = (p[2] / m.value()).atan();
                let rho = p[0].hypot(p[1]);
                let omega = (rho * nu.cos() / m.value()).asinh();
                Self::Hyperbolic { omega, nu, phi: azimuth(p[0], p[1]) }
            }
        }
    }

    /// Coordinates of the same momentum in `target`.
    pub fn convert(&self, target: ChartKind, m: Mass) -> Result<Self> {
        self.validate()?;
        if self.chart() == target {
            return Ok(*self);
        }
        // Direct route between the two curvilinear charts keeps φ exact.
        if let (Self::Hyperbolic { omega, nu, phi }, ChartKind::Spherical) = (*self, target) {
            return Ok(hyperbolic_to_spherical(omega, nu, phi, m));
        }
        Ok(Self::from_cartesian(self.to_cartesian(m), target, m))
    }

    /// Hyperbolic coordinates (ω, ν, φ) of this point.
    pub fn hyperbolic_coords(&self, m: Mass) -> (f64, f64, f64) {
        match *self {
            Self::Hyperbolic { omega, nu, phi } => (omega, nu, phi),
            _ => match Self::from_cartesian(self.to_cartesian(m), ChartKind::Hyperbolic, m) {
                Self::Hyperbolic { omega, nu, phi } => (omega, nu, phi),
                _ => unreachable!(),
            },
        }
    }

    /// Spherical coordinates (r, θ, φ) of this point.
    pub fn spherical_coords(&self, m: Mass) -> (f64, f64, f64) {
        let s = match *self {
            Self::Spherical { .. } => *self,
            Self::Hyperbolic { omega, nu, phi } => hyperbolic_to_spherical(omega, nu, phi, m),
            Self::Cartesian { p } => Self::from_cartesian(p, ChartKind::Spherical, m),
        };
        match s {
            Self::Spherical { r, theta, phi } => (r, theta, phi),
            _ => unreachable!(),
        }
    }

    /// E_π = √(‖π‖² + m²).
    pub fn energy(&self, m: Mass) -> f64 {
        match *self {
            Self::Hyperbolic { omega, nu, .. } => m.value() * omega.cosh() / nu.cos(),
            Self::Spherical { r, .. } => r.hypot(m.value()),
            Self::Cartesian { p } => p[0].hypot(p[1]).hypot(p[2]).hypot(m.value()),
        }
    }

    /// Density of dμ(π) with respect to the chart's coordinate volume:
    /// m/E (Cartesian), m r² sin θ / E (spherical), m³ sinh ω sec³ν (hyperbolic).
    pub fn measure_weight(&self, m: Mass) -> f64 {
        match *self {
            Self::Cartesian { .. } => m.value() / self.energy(m),
            Self::Spherical { r, theta, .. } => m.value() * r * r * theta.sin() / self.energy(m),
            Self::Hyperbolic { omega, nu, .. } => {
                let sec = 1.0 / nu.cos();
                m.value().powi(3) * omega.sinh() * sec * sec * sec
            }
        }
    }
}

fn hyperbolic_to_spherical(omega: f64, nu: f64, phi: f64, m: Mass) -> MomentumPoint {
    let rho = m.value() * omega.sinh() / nu.cos();
    let pz = m.value() * nu.tan();
    let r = rho.hypot(pz);
    let theta = if r == 0.0 { 0.0 } else { rho.atan2(pz) };
    MomentumPoint::Spherical { r, theta, phi }
}

/// Free-function form of [`MomentumPoint::convert`].
pub fn convert(point: &MomentumPoint, target: ChartKind, m: Mass) -> Result<MomentumPoint> {
    point.convert(target, m)
}

/// Free-function form of [`MomentumPoint::energy`].
pub fn energy(point: &MomentumPoint, m: Mass) -> f64 {
    point.energy(m)
}

/// Free-function form of [`MomentumPoint::measure_weight`].
pub fn measure_weight(point: &MomentumPoint, m: Mass) -> f64 {
    point.measure_weight(m)
}

/// Active boost along z by `rapidity` of an on-shell momentum.
pub fn boost_momentum(p: [f64; 3], rapidity: f64, m: Mass) -> [f64; 3] {
    let e = p[0].hypot(p[1]).hypot(p[2]).hypot(m.value());
    let (sh, ch) = (rapidity.sinh(), rapidity.cosh());
    [p[0], p[1], ch * p[2] + sh * e]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m1() -> Mass {
        Mass::new(1.0).unwrap()
    }

    #[test]
    fn mass_must_be_positive() {
        assert!(Mass::new(0.0).is_err());
        assert!(Mass::new(-2.0).is_err());
        assert!(Mass::new(f64::INFINITY).is_err());
    }

    #[test]
    fn origin_maps_to_hyperbolic_origin() {
        let h = MomentumPoint::cartesian([0.0; 3]).convert(ChartKind::Hyperbolic, m1()).unwrap();
        assert_eq!(h, MomentumPoint::Hyperbolic { omega: 0.0, nu: 0.0, phi: 0.0 });
    }

    #[test]
    fn unit_pz_maps_to_quarter_pi() {
        let m = Mass::new(2.5).unwrap();
        let h = MomentumPoint::cartesian([0.0, 0.0, 2.5]).convert(ChartKind::Hyperbolic, m).unwrap();
        let (omega, nu, _) = h.hyperbolic_coords(m);
        assert_eq!(omega, 0.0);
        assert_relative_eq!(nu, PI / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn hyperbolic_round_trip() {
        let h = MomentumPoint::hyperbolic(0.8, 0.6, 1.0).unwrap();
        let back = h.convert(ChartKind::Cartesian, m1()).unwrap().convert(ChartKind::Hyperbolic, m1()).unwrap();
        let (o, n, p) = back.hyperbolic_coords(m1());
        assert_relative_eq!(o, 0.8, max_relative = 1e-12);
        assert_relative_eq!(n, 0.6, max_relative = 1e-12);
        assert_relative_eq!(p, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(MomentumPoint::hyperbolic(0.1, FRAC_PI_2, 0.0).is_err());
        assert!(MomentumPoint::hyperbolic(-0.1, 0.0, 0.0).is_err());
        assert!(MomentumPoint::spherical(1.0, 4.0, 0.0).is_err());
        assert!(MomentumPoint::spherical(1.0, 1.0, TAU).is_err());
        let bad = MomentumPoint::Hyperbolic { omega: 0.0, nu: 2.0, phi: 0.0 };
        assert!(bad.convert(ChartKind::Cartesian, m1()).is_err());
    }

    #[test]
    fn energies() {
        let m = Mass::new(1.3).unwrap();
        assert_eq!(MomentumPoint::cartesian([0.0; 3]).energy(m), 1.3);
        let p = MomentumPoint::cartesian([0.0, 0.0, 1.3]);
        assert_relative_eq!(p.energy(m), 1.3 * 2f64.sqrt(), max_relative = 1e-15);
        let h = p.convert(ChartKind::Hyperbolic, m).unwrap();
        assert_relative_eq!(h.energy(m), 1.3 * 2f64.sqrt(), max_relative = 1e-14);
        let h1 = MomentumPoint::hyperbolic(1.0, 0.0, 0.0).unwrap();
        let c1 = h1.convert(ChartKind::Cartesian, m).unwrap();
        assert_relative_eq!(h1.energy(m), 1.3 * 1f64.cosh(), max_relative = 1e-15);
        assert_relative_eq!(c1.energy(m), 1.3 * 1f64.cosh(), max_relative = 1e-14);
    }

    #[test]
    fn spherical_weight_matches_radial_marginal() {
        let m = m1();
        let p = MomentumPoint::spherical(2.0, 0.4, 1.0).unwrap();
        let expected = 4.0 * 0.4f64.sin() / 5f64.sqrt();
        assert_relative_eq!(p.measure_weight(m), expected, max_relative = 1e-15);
    }

    #[test]
    fn hyperbolic_weight_is_sec_cubed_in_nu() {
        let m = m1();
        let at = |nu: f64| MomentumPoint::hyperbolic(0.7, nu, 0.0).unwrap().measure_weight(m);
        for nu in [0.2, 0.9, 1.4] {
            assert_relative_eq!(at(nu) / at(0.0), nu.cos().powi(-3), max_relative = 1e-13);
        }
    }

    #[test]
    fn boost_preserves_mass_shell() {
        let m = Mass::new(0.7).unwrap();
        let p = boost_momentum([0.1, -0.3, 0.4], 0.9, m);
        let e0 = MomentumPoint::cartesian([0.1, -0.3, 0.4]).energy(m);
        let e1 = MomentumPoint::cartesian(p).energy(m);
        // E' = cosh χ E + sinh χ p_z
        assert_relative_eq!(e1, 0.9f64.cosh() * e0 + 0.9f64.sinh() * 0.4, max_relative = 1e-14);
    }
}
