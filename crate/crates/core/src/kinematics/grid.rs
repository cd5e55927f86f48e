//! Product quadrature grids carrying the invariant-measure weight per node.
//!
//! Gauss–Legendre rules are used on every bounded axis; the azimuth uses the
//! periodic trapezoid rule. Truncation bounds are part of the spec and are
//! echoed in [`Truncation`] so that tail losses stay visible.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::chart::{ChartKind, Mass, MomentumPoint};
use crate::error::{invalid, Result};
use crate::quadrature::{gauss_legendre, periodic_trapezoid};

/// Placement of the radial nodes of a spherical grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum RadialMap {
    /// Gauss–Legendre in r on [0, r_max] (r_max in units of m).
    Linear { r_max: f64 },
    /// Gauss–Legendre in u = ln(r / (E + m)) on [u_min, u_max], u_max ≤ 0.
    /// This is the variable in which the time eigenfunctions are plane waves.
    TimeLog { u_min: f64, u_max: f64 },
}

/// Serializable description of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "lowercase")]
pub enum GridSpec {
    Cartesian {
        n: [usize; 3],
        /// Half-width of the cube in units of m.
        half_width: f64,
    },
    Spherical {
        n_r: usize,
        n_theta: usize,
        n_phi: usize,
        radial: RadialMap,
    },
    Hyperbolic {
        n_omega: usize,
        n_nu: usize,
        n_phi: usize,
        omega_max: f64,
        /// Defaults to π/2 (the whole chart).
        #[serde(default = "default_nu_max")]
        nu_max: f64,
    },
}

fn default_nu_max() -> f64 {
    FRAC_PI_2
}

impl GridSpec {
    pub fn spherical(n_r: usize, n_theta: usize, n_phi: usize, r_max: f64) -> Self {
        Self::Spherical { n_r, n_theta, n_phi, radial: RadialMap::Linear { r_max } }
    }

    pub fn spherical_time(n_r: usize, n_theta: usize, n_phi: usize, u_min: f64, u_max: f64) -> Self {
        Self::Spherical { n_r, n_theta, n_phi, radial: RadialMap::TimeLog { u_min, u_max } }
    }

    pub fn hyperbolic(n_omega: usize, n_nu: usize, n_phi: usize, omega_max: f64) -> Self {
        Self::Hyperbolic { n_omega, n_nu, n_phi, omega_max, nu_max: FRAC_PI_2 }
    }

    pub fn chart(&self) -> ChartKind {
        match self {
            Self::Cartesian { .. } => ChartKind::Cartesian,
            Self::Spherical { .. } => ChartKind::Spherical,
            Self::Hyperbolic { .. } => ChartKind::Hyperbolic,
        }
    }

    pub fn sizes(&self) -> [usize; 3] {
        match *self {
            Self::Cartesian { n, .. } => n,
            Self::Spherical { n_r, n_theta, n_phi, .. } => [n_r, n_theta, n_phi],
            Self::Hyperbolic { n_omega, n_nu, n_phi, .. } => [n_omega, n_nu, n_phi],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes().iter().any(|&n| n < 2) {
            return Err(invalid(format!("grid sizes must be >= 2 per dimension: {:?}", self.sizes())));
        }
        let bounded = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{what} must be positive and finite, got {v}")))
            }
        };
        match *self {
            Self::Cartesian { half_width, .. } => bounded(half_width, "half_width"),
            Self::Spherical { radial, .. } => match radial {
                RadialMap::Linear { r_max } => bounded(r_max, "r_max"),
                RadialMap::TimeLog { u_min, u_max } => {
                    if u_min.is_finite() && u_max <= 0.0 && u_min < u_max {
                        Ok(())
                    } else {
                        Err(invalid(format!("need u_min < u_max <= 0, got [{u_min}, {u_max}]")))
                    }
                }
            },
            Self::Hyperbolic { omega_max, nu_max, .. } => {
                bounded(omega_max, "omega_max")?;
                if nu_max > 0.0 && nu_max <= FRAC_PI_2 {
                    Ok(())
                } else {
                    Err(invalid(format!("nu_max must lie in (0, π/2], got {nu_max}")))
                }
            }
        }
    }
}

/// Nodes and weights along one coordinate axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Axis {
    fn new((nodes, weights): (Vec<f64>, Vec<f64>)) -> Self {
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Truncation bounds of a grid, in units of m for momenta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Largest |π| reached along the truncated axis (r_max, or m sinh ω_max).
    pub momentum_reach: f64,
    /// The raw bound from the spec (r_max, u_max, ω_max or half-width).
    pub bound: f64,
    pub bound_name: &'static str,
}

/// An immutable product grid. Node index = (i₀ · n₁ + i₁) · n₂ + i₂.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    spec: GridSpec,
    mass: Mass,
    axes: [Axis; 3],
    points: Vec<MomentumPoint>,
    weights: Vec<f64>,
}

/// r(u) for u = ln(r / (E + m)): r = 2m s / (1 − s²) with s = e^u.
pub fn radius_from_time_log(u: f64, m: Mass) -> f64 {
    let s = u.exp();
    // 1 − s² = −expm1(2u) avoids cancellation as u → 0⁻.
    2.0 * m.value() * s / (-(2.0 * u).exp_m1())
}

/// u = ln(r / (E + m)).
pub fn time_log_from_radius(r: f64, m: Mass) -> f64 {
    (r / (r.hypot(m.value()) + m.value())).ln()
}

impl QuadratureGrid {
    pub fn build(spec: GridSpec, mass: Mass) -> Result<Self> {
        spec.validate()?;
        let m = mass.value();
        let [n0, n1, n2] = spec.sizes();
        let (axes, radial_jacobian): ([Axis; 3], Option<Vec<f64>>) = match spec {
            GridSpec::Cartesian { half_width, .. } => {
                let l = half_width * m;
                (
                    [
                        Axis::new(gauss_legendre(n0, -l, l)),
                        Axis::new(gauss_legendre(n1, -l, l)),
                        Axis::new(gauss_legendre(n2, -l, l)),
                    ],
                    None,
                )
            }
            GridSpec::Spherical { radial, .. } => {
                let (radial_axis, jac) = match radial {
                    RadialMap::Linear { r_max } => (Axis::new(gauss_legendre(n0, 0.0, r_max * m)), None),
                    RadialMap::TimeLog { u_min, u_max } => {
                        let (u, w) = gauss_legendre(n0, u_min, u_max);
                        let r: Vec<f64> = u.iter().map(|&u| radius_from_time_log(u, mass)).collect();
                        // dr/du = r E / m
                        let jac = r.iter().map(|&r| r * r.hypot(m) / m).collect();
                        (Axis { nodes: r, weights: w }, Some(jac))
                    }
                };
                // θ nodes from Gauss–Legendre in cos θ; the weight is dcos θ.
                let (x, wx) = gauss_legendre(n1, -1.0, 1.0);
                let theta: Vec<f64> = x.iter().rev().map(|&c| c.acos()).collect();
                let wt: Vec<f64> = wx.into_iter().rev().collect();
                ([radial_axis, Axis { nodes: theta, weights: wt }, Axis::new(periodic_trapezoid(n2, TAU))], jac)
            }
            GridSpec::Hyperbolic { omega_max, nu_max, .. } => (
                [
                    Axis::new(gauss_legendre(n0, 0.0, omega_max)),
                    Axis::new(gauss_legendre(n1, -nu_max, nu_max)),
                    Axis::new(periodic_trapezoid(n2, TAU)),
                ],
                None,
            ),
        };

        let mut points = Vec::with_capacity(n0 * n1 * n2);
        let mut weights = Vec::with_capacity(n0 * n1 * n2);
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    let (a, b, c) = (axes[0].nodes[i0], axes[1].nodes[i1], axes[2].nodes[i2]);
                    let w = axes[0].weights[i0] * axes[1].weights[i1] * axes[2].weights[i2];
                    let (pt, dens) = match spec {
                        GridSpec::Cartesian { .. } => {
                            let p = MomentumPoint::Cartesian { p: [a, b, c] };
                            (p, p.measure_weight(mass))
                        }
                        GridSpec::Spherical { .. } => {
                            let p = MomentumPoint::Spherical { r: a, theta: b, phi: c };
                            // sin θ dθ is already in the cos θ weight.
                            let jac = radial_jacobian.as_ref().map_or(1.0, |j| j[i0]);
                            (p, m * a * a / p.energy(mass) * jac)
                        }
                        GridSpec::Hyperbolic { .. } => {
                            let p = MomentumPoint::Hyperbolic { omega: a, nu: b, phi: c };
                            (p, p.measure_weight(mass))
                        }
                    };
                    points.push(pt);
                    weights.push(w * dens);
                }
            }
        }
        Ok(Self { spec, mass, axes, points, weights })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn mass(&self) -> Mass {
        self.mass
    }

    pub fn chart(&self) -> ChartKind {
        self.spec.chart()
    }

    pub fn axes(&self) -> &[Axis; 3] {
        &self.axes
    }

    pub fn points(&self) -> &[MomentumPoint] {
        &self.points
    }

    /// Invariant-measure weight of each node.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index(&self, i0: usize, i1: usize, i2: usize) -> usize {
        (i0 * self.axes[1].len() + i1) * self.axes[2].len() + i2
    }

    pub fn truncation(&self) -> Truncation {
        let m = self.mass.value();
        match self.spec {
            GridSpec::Cartesian { half_width, .. } => {
                Truncation { momentum_reach: half_width * m, bound: half_width, bound_name: "half_width" }
            }
            GridSpec::Spherical { radial: RadialMap::Linear { r_max }, .. } => {
                Truncation { momentum_reach: r_max * m, bound: r_max, bound_name: "r_max" }
            }
            GridSpec::Spherical { radial: RadialMap::TimeLog { u_max, .. }, .. } => Truncation {
                momentum_reach: if u_max >= 0.0 { f64::INFINITY } else { radius_from_time_log(u_max, self.mass) },
                bound: u_max,
                bound_name: "u_max",
            },
            GridSpec::Hyperbolic { omega_max, nu_max, .. } => Truncation {
                momentum_reach: if nu_max >= FRAC_PI_2 {
                    m * omega_max.sinh()
                } else {
                    (m * omega_max.sinh() / nu_max.cos()).min(m * nu_max.tan())
                },
                bound: omega_max,
                bound_name: "omega_max",
            },
        }
    }

    /// Fraction of ∑ w |f|² carried by the outermost 10% of nodes along the
    /// truncated axis (radial / ω / every Cartesian face). A crude but honest
    /// indicator that the truncation bound is too tight.
    pub fn edge_fraction(&self, density: &[f64]) -> f64 {
        let [n0, n1, n2] = self.spec.sizes();
        let edge = |i: usize, n: usize| i + (n / 10).max(1) >= n;
        let mut total = 0.0;
        let mut outer = 0.0;
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    let k = self.index(i0, i1, i2);
                    let v = self.weights[k] * density[k];
                    total += v;
                    let on_edge = match self.spec {
                        GridSpec::Cartesian { .. } => {
                            let lo = |i: usize, n: usize| i < (n / 10).max(1);
                            edge(i0, n0) || edge(i1, n1) || edge(i2, n2) || lo(i0, n0) || lo(i1, n1) || lo(i2, n2)
                        }
                        _ => edge(i0, n0),
                    };
                    if on_edge {
                        outer += v;
                    }
                }
            }
        }
        if total > 0.0 {
            outer / total
        } else {
            0.0
        }
    }
}

/// Free-function form of [`QuadratureGrid::build`].
pub fn build_grid(spec: GridSpec, mass: Mass) -> Result<QuadratureGrid> {
    QuadratureGrid::build(spec, mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn rejects_degenerate_specs() {
        let m = Mass::default();
        assert!(build_grid(GridSpec::spherical(0, 16, 32, 12.0), m).is_err());
        assert!(build_grid(GridSpec::spherical(8, 1, 32, 12.0), m).is_err());
        assert!(build_grid(GridSpec::spherical(8, 8, 8, -1.0), m).is_err());
        assert!(build_grid(GridSpec::hyperbolic(8, 8, 8, 0.0), m).is_err());
        assert!(build_grid(GridSpec::spherical_time(8, 8, 8, -3.0, 0.5), m).is_err());
        let bad_nu = GridSpec::Hyperbolic { n_omega: 4, n_nu: 4, n_phi: 4, omega_max: 1.0, nu_max: 2.0 };
        assert!(build_grid(bad_nu, m).is_err());
    }

    #[test]
    fn weights_are_positive() {
        let m = Mass::new(1.7).unwrap();
        for spec in [
            GridSpec::spherical(8, 6, 8, 5.0),
            GridSpec::spherical_time(8, 6, 8, -9.0, -0.01),
            GridSpec::hyperbolic(8, 10, 6, 3.0),
            GridSpec::Cartesian { n: [5, 6, 7], half_width: 4.0 },
        ] {
            let g = build_grid(spec, m).unwrap();
            assert!(g.weights().iter().all(|&w| w > 0.0), "{spec:?}");
            assert_eq!(g.len(), spec.sizes().iter().product::<usize>());
        }
    }

    #[test]
    fn time_log_map_round_trips() {
        let m = Mass::new(0.8).unwrap();
        for r in [1e-4, 0.3, 2.0, 40.0] {
            let u = time_log_from_radius(r, m);
            assert_relative_eq!(radius_from_time_log(u, m), r, max_relative = 1e-12);
        }
    }

    #[test]
    fn radial_marginal_of_measure() {
        // ∫ dμ over |π| < R equals 4π m ∫₀^R r²/E dr
        let m = Mass::default();
        let g = build_grid(GridSpec::spherical(40, 4, 4, 3.0), m).unwrap();
        let total: f64 = g.weights().iter().sum();
        let expected = 4.0 * PI * crate::quadrature::integrate(60, 0.0, 3.0, |r| r * r / r.hypot(1.0));
        assert_relative_eq!(total, expected, max_relative = 1e-12);
    }

    #[test]
    fn serde_round_trip_of_spec() {
        let spec = GridSpec::spherical_time(64, 16, 32, -12.0, -1e-3);
        let text = serde_json::to_string(&spec).unwrap();
        let back: GridSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }
}
