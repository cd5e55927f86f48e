//! Time and position POVMs: elements, densities, overlap kernels and
//! completeness.

mod completeness;
mod element;
mod position;
mod profile;
mod time;

pub use completeness::{completeness_residual, CompletenessTruncation};
pub use element::{ElementLabel, PovmElementSpec};
pub use position::{position_density, position_overlap, sinc_kernel, PositionProjector, PositionTruncation};
pub use profile::{interval_probability, DensityProfile, ProfileAxis, ProfileTruncation, NEGATIVITY_FLOOR};
pub use time::{time_density, time_overlap_smeared, SmearedOverlap, TimeProjector, TimeWindow};
