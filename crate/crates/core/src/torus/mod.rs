//! Periodic-box spectral representation.

mod field;
mod grid;
mod spectral;

pub use field::{SpectralTensorField, SpectralVectorField, DIVFREE_TOL, HERMITIAN_TOL};
pub use grid::TorusGrid;
pub use spectral::{
    fractional_semigroup, fractional_symbol, leray_project, nonlinear_tensor, semigroup_symbol,
    tensor_divergence,
};

pub(crate) use spectral::{apply_symbol, check_beta, projected_flux};
