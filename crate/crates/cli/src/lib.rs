//! Command-line driver for the propertime library: configuration, artifact
//! emission and one function per subcommand.

// Range checks are written as negated comparisons so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod emit;
pub mod error;
pub mod verify;
