//! Proper-time sweeps of the position density.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tails::tail_exponent;
use crate::error::{invalid, Result};
use crate::kinematics::QuadratureGrid;
use crate::operators::{apply_momentum, expectation};
use crate::povm::{DensityProfile, PositionProjector, PositionTruncation};
use crate::states::PhysState;

/// Least-squares line y = intercept + slope·x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    /// max |residual| / max(|total drift|, spread of y, 1e-300).
    pub relative_residual: f64,
}

impl LinearFit {
    pub fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(invalid("a line fit needs at least two matching samples"));
        }
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        if sxx == 0.0 {
            return Err(invalid("a line fit needs distinct abscissae"));
        }
        let slope = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx;
        let intercept = my - slope * mx;
        let resid = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).abs()).fold(0.0, f64::max);
        let (xlo, xhi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
        let (ylo, yhi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
        let scale = (slope * (xhi - xlo)).abs().max(yhi - ylo).max(1e-300);
        Ok(Self { intercept, slope, relative_residual: resid / scale })
    }
}

/// The τ-family p(z; τ) of a state with its moment trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub taus: Vec<f64>,
    pub profiles: Vec<DensityProfile>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    /// Power-law exponent of the amplitude envelope √p on the tails, when the
    /// window is wide enough.
    pub tail_exponents: Vec<Option<f64>>,
    pub total_masses: Vec<f64>,
    pub drift: Option<LinearFit>,
    /// ⟨Π³⟩/m, the drift predicted by the proper-time equation of motion.
    pub expected_slope: f64,
    pub warnings: Vec<String>,
}

impl SweepResult {
    /// `tau,mean,variance,tail_exponent,total_mass`; a missing exponent is
    /// written as `nan`.
    pub fn summary_csv(&self) -> String {
        let f = |x: f64| format!("{x:.16e}");
        let mut out = String::new();
        let _ = writeln!(out, "# expected_slope,{}", f(self.expected_slope));
        if let Some(d) = self.drift {
            let _ = writeln!(out, "# fitted_slope,{}", f(d.slope));
            let _ = writeln!(out, "# affine_residual,{}", f(d.relative_residual));
        }
        let _ = writeln!(out, "tau,mean,variance,tail_exponent,total_mass");
        for i in 0..self.taus.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                f(self.taus[i]),
                f(self.means[i]),
                f(self.variances[i]),
                self.tail_exponents[i].map_or("nan".to_string(), f),
                f(self.total_masses[i])
            );
        }
        out
    }
}

/// p(z; τ) for each τ (units 1/m) with the mean trajectory fitted by a line.
/// The transverse projection is shared across τ.
pub fn propertime_sweep(
    state: &PhysState,
    taus: &[f64],
    z_grid: &[f64],
    truncation: PositionTruncation,
    grid: &QuadratureGrid,
) -> Result<SweepResult> {
    if taus.is_empty() || taus.iter().any(|t| !t.is_finite()) {
        return Err(invalid("τ list must be non-empty and finite"));
    }
    let projector = PositionProjector::new(state, grid, truncation)?;
    let profiles: Vec<DensityProfile> =
        taus.par_iter().map(|&t| projector.density(t, z_grid)).collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    for p in &profiles {
        for w in &p.warnings {
            warnings.push(format!("tau {}: {w}", p.tau));
        }
    }
    let means: Vec<f64> = profiles.iter().map(DensityProfile::mean).collect();
    let variances = profiles.iter().map(DensityProfile::variance).collect();
    let total_masses = profiles.iter().map(|p| p.total_mass).collect();
    let mass = grid.mass().value();
    let tail_exponents = profiles
        .iter()
        .map(|p| {
            let amp: Vec<f64> = p.density.iter().map(|v| v.sqrt()).collect();
            Ok(tail_exponent(&p.points, &amp, mass)?.map(|f| f.power))
        })
        .collect::<Result<_>>()?;
    let drift = if taus.len() >= 2 { Some(LinearFit::fit(taus, &means)?) } else { None };
    let norm = state.norm_sq(grid)?;
    let pi3 = expectation(&apply_momentum(state, 3, grid)?, state, grid)?.re / norm;
    Ok(SweepResult {
        taus: taus.to_vec(),
        profiles,
        means,
        variances,
        tail_exponents,
        total_masses,
        drift,
        expected_slope: pi3 / mass,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_affine_data() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|x| 0.25 - 1.5 * x).collect();
        let f = LinearFit::fit(&x, &y).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-14 && (f.intercept - 0.25).abs() < 1e-14);
        assert!(f.relative_residual < 1e-14);
    }

    #[test]
    fn line_fit_needs_spread() {
        assert!(LinearFit::fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(LinearFit::fit(&[1.0], &[0.0]).is_err());
    }
}
