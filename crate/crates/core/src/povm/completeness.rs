use serde::{Deserialize, Serialize};

use super::position::{PositionProjector, PositionTruncation};
use super::time::TimeProjector;
use crate::error::{Error, Result};
use crate::kinematics::QuadratureGrid;
use crate::states::PhysState;

/// Spectral truncation for a completeness check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CompletenessTruncation {
    Time { l_max: u32 },
    Position(PositionTruncation),
}

/// |1 − ∫p| for the whole t- or z-axis at the given spectral truncation.
///
/// The axis integral is taken in closed form (Parseval on the half-line or
/// the ν-interval), so only the spectral truncation and the momentum grid
/// contribute. Non-normalized states are rejected.
pub fn completeness_residual(
    state: &PhysState,
    truncation: CompletenessTruncation,
    grid: &QuadratureGrid,
) -> Result<f64> {
    if !state.is_normalized() {
        return Err(Error::InvalidArgument("completeness needs a normalized state".into()));
    }
    let mass = match truncation {
        CompletenessTruncation::Time { l_max } => TimeProjector::new(state, grid, l_max)?.spectral_mass(),
        CompletenessTruncation::Position(t) => PositionProjector::new(state, grid, t)?.spectral_mass(),
    };
    Ok((1.0 - mass).abs())
}
