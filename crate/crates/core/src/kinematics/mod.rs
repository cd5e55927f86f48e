//! Momentum-space charts, the invariant measure, quadrature grids, inner
//! products and the z-boost.

mod chart;
mod grid;

pub use chart::{boost_momentum, convert, energy, measure_weight, ChartKind, Mass, MomentumPoint};
pub use grid::{
    build_grid, radius_from_time_log, time_log_from_radius, Axis, GridSpec, QuadratureGrid, RadialMap, Truncation,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{Boosted, PhysState, Sign};

/// ⟨a|b⟩ = Σ_ξ ∫ dμ(π) conj(a_ξ) b_ξ on `grid`.
///
/// The node sum is sequential over a fixed order, so the result is
/// bit-reproducible for a given grid.
pub fn inner_product(a: &PhysState, b: &PhysState, grid: &QuadratureGrid) -> Result<Complex64> {
    if a.mass() != grid.mass() || b.mass() != grid.mass() {
        return Err(Error::InvalidArgument("state and grid masses differ".into()));
    }
    let va = a.values_on(grid)?;
    let vb = b.values_on(grid)?;
    Ok(pair_values(&va, &vb, grid.weights()))
}

/// Σ_ξ Σ_k w_k conj(a_ξ,k) b_ξ,k for precomputed node values.
pub fn pair_values(a: &[Vec<Complex64>; 2], b: &[Vec<Complex64>; 2], weights: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for s in Sign::BOTH {
        let (xa, xb) = (&a[s.index()], &b[s.index()]);
        if xa.is_empty() || xb.is_empty() {
            continue;
        }
        for ((w, u), v) in weights.iter().zip(xa).zip(xb) {
            acc += *w * u.conj() * v;
        }
    }
    acc
}

/// The z-boost by `rapidity`: (Uψ)(π) = ψ(Λ⁻¹π). Unitary because dμ is
/// Lorentz invariant. The returned state keeps the normalization flag.
pub fn boost_z(state: &PhysState, rapidity: f64) -> Result<PhysState> {
    if !rapidity.is_finite() {
        return Err(Error::InvalidArgument(format!("rapidity must be finite, got {rapidity}")));
    }
    if rapidity == 0.0 {
        return Ok(state.clone());
    }
    if !state.is_evaluable() {
        return Err(Error::NotEvaluable);
    }
    Ok(state.map_components(|amp| Boosted::new(amp, rapidity)))
}
