//! Admissibility of states, tail laws, proper-time sweeps and the boost
//! covariance check.

mod admissibility;
mod covariance;
mod sweep;
mod tails;

pub use admissibility::{
    admissibility_check, admissibility_check_with, AdmissibilityReport, AdmissibilityThresholds, Candidate, Verdict,
};
pub use covariance::{
    covariance_check, covariance_convergence, CovarianceConvergence, CovarianceGrids, CovarianceReport,
    STENCIL_TOLERANCE,
};
pub use sweep::{propertime_sweep, LinearFit, SweepResult};
pub use tails::{
    exponential_tail_test, tail_exponent, ExponentialTailReport, TailFit, MIN_TAIL_HALF_WIDTH, RATE_TOLERANCE,
    TAIL_FRACTION,
};
