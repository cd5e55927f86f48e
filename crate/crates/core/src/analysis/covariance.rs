//! Boost covariance of the position operator: for a pure z-axis boost U(χ),
//! ⟨Uψ|Q̌³Uψ⟩ = cosh χ ⟨ψ|Q̌³ψ⟩ + sinh χ ⟨ψ|Q̌⁰ψ⟩.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kinematics::{boost_z, ChartKind, QuadratureGrid};
use crate::operators::{apply_q0, apply_q3, StencilSpec};
use crate::states::PhysState;

/// Stencil error estimates above this flag non-convergence.
pub const STENCIL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub rapidity: f64,
    pub tau: f64,
    pub step: f64,
    /// ⟨Uψ|Q̌³Uψ⟩ / ⟨Uψ|Uψ⟩.
    pub boosted_q3: Complex64,
    /// ⟨ψ|Q̌³ψ⟩ / ⟨ψ|ψ⟩.
    pub q3: Complex64,
    /// ⟨ψ|Q̌⁰ψ⟩ / ⟨ψ|ψ⟩.
    pub q0: Complex64,
    /// cosh χ ⟨Q̌³⟩ + sinh χ ⟨Q̌⁰⟩.
    pub predicted: Complex64,
    /// |boosted_q3 − predicted| / max(|predicted|, |q3|, |q0|).
    pub discrepancy: f64,
    /// Largest error estimate of the extrapolated derivatives,
    /// ‖D(h/2) − D(h)‖ / (15 ‖Q̌ψ‖).
    pub stencil_error: f64,
    pub converged: bool,
}

/// Grids for the two quadratic forms: Q̌⁰ on the spherical chart, Q̌³ on the
/// hyperbolic chart.
#[derive(Debug, Clone, Copy)]
pub struct CovarianceGrids<'a> {
    pub spherical: &'a QuadratureGrid,
    pub hyperbolic: &'a QuadratureGrid,
}

/// Compares both sides of the boost identity at rapidity χ and proper time τ
/// (units 1/m) with one stencil.
pub fn covariance_check(
    state: &PhysState,
    rapidity: f64,
    tau: f64,
    grids: CovarianceGrids<'_>,
    stencil: &StencilSpec,
) -> Result<CovarianceReport> {
    if grids.spherical.chart() != ChartKind::Spherical {
        return Err(Error::ChartMismatch { expected: "spherical".into(), found: grids.spherical.chart().to_string() });
    }
    if grids.hyperbolic.chart() != ChartKind::Hyperbolic {
        return Err(Error::ChartMismatch {
            expected: "hyperbolic".into(),
            found: grids.hyperbolic.chart().to_string(),
        });
    }
    if !rapidity.is_finite() || !tau.is_finite() {
        return Err(invalid("χ and τ must be finite"));
    }
    let (sg, hg) = (grids.spherical, grids.hyperbolic);
    let boosted = boost_z(state, rapidity)?;

    let a3 = apply_q3(state, tau, hg, stencil)?;
    let q3 = a3.paired_with(state, hg)? / state.norm_sq(hg)?;
    let a0 = apply_q0(state, tau, sg, stencil)?;
    let q0 = a0.paired_with(state, sg)? / state.norm_sq(sg)?;
    let b3 = apply_q3(&boosted, tau, hg, stencil)?;
    let boosted_q3 = b3.paired_with(&boosted, hg)? / boosted.norm_sq(hg)?;

    let predicted = rapidity.cosh() * q3 + rapidity.sinh() * q0;
    let scale = predicted.norm().max(q3.norm()).max(q0.norm()).max(f64::MIN_POSITIVE);
    let discrepancy = (boosted_q3 - predicted).norm() / scale;
    let stencil_error = a3.residual.max(a0.residual).max(b3.residual) / 15.0;
    Ok(CovarianceReport {
        rapidity,
        tau,
        step: stencil.step,
        boosted_q3,
        q3,
        q0,
        predicted,
        discrepancy,
        stencil_error,
        converged: stencil_error.is_finite() && stencil_error < STENCIL_TOLERANCE,
    })
}

/// Discrepancies under step refinement with unextrapolated stencils, and the
/// observed order log₂(d(h)/d(h/2)) of the last halving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceConvergence {
    pub steps: Vec<f64>,
    pub discrepancies: Vec<f64>,
    pub order: Option<f64>,
}

pub fn covariance_convergence(
    state: &PhysState,
    rapidity: f64,
    tau: f64,
    grids: CovarianceGrids<'_>,
    steps: &[f64],
) -> Result<CovarianceConvergence> {
    if steps.len() < 2 || steps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("need at least two strictly decreasing steps"));
    }
    let discrepancies = steps
        .iter()
        .map(|&h| Ok(covariance_check(state, rapidity, tau, grids, &StencilSpec::raw(h)?)?.discrepancy))
        .collect::<Result<Vec<f64>>>()?;
    let n = steps.len();
    let (d1, d2) = (discrepancies[n - 2], discrepancies[n - 1]);
    let order = (d1 > 0.0 && d2 > 0.0).then(|| (d1 / d2).ln() / (steps[n - 2] / steps[n - 1]).ln());
    Ok(CovarianceConvergence { steps: steps.to_vec(), discrepancies, order })
}
