//! Periodic Fourier representation of fields and the linear operators acting
//! on them.

mod field;
mod grid;
pub mod ops;

pub use field::{random_field, random_scalar, ScalarField, VectorField};
pub use grid::{index_of, wavenumber, Grid};
pub use ops::{
    advect, apply_lambda, apply_lambda_scalar, band_filter, cross, cross_physical, curl, curl_inverse, dealias,
    dealias_scalar, divergence, dot, gradient, laplacian, laplacian_scalar, leray_project, next_shell, partial,
    single_mode, Direction,
};
