//! Acting rules, deficiency solutions and self-adjoint extensions.

mod acting;
mod extensions;
mod stencil;

pub use acting::{apply_momentum, apply_q0, apply_q3, expectation, momentum_state, OperatorApplication, OperatorKind};
pub(crate) use extensions::longitudinal_mode;
pub use extensions::{
    deficiency_solutions, eigenvalue, extension_spectrum, q0_eigenfunction, q0_extension_eigenfunction,
    q3_eigenfunction, q3_longitudinal_eigenfunction, DeficiencySolution, ExtensionParam, ExtensionSpectrum,
};
pub use stencil::StencilSpec;
