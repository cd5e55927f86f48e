//! Proper-time localization of a free spinless relativistic particle.
//!
//! States live in H⁺ ⊕ H⁻ over the mass shell with measure dμ(π) = m d³π/E.
//! The crate provides the four-position acting rules, the spectra of the
//! self-adjoint extensions of Q⁰ and Q³, time and position POVM densities,
//! and an admissibility analysis for localized states. Natural units are
//! used throughout with the mass m as the only scale.

// Range checks are written as negated comparisons so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod kinematics;
pub mod operators;
pub mod povm;
pub mod quadrature;
pub mod specfun;
pub mod states;

pub use error::{Error, Result};
