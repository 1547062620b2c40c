//! Periodic-box discretization of `R^3`: fields, continuum-normalized
//! transforms, fractional symbols, convolution and Sobolev-type norms.

mod field;
mod grid;
mod norms;
mod ops;
mod random;
pub mod snapshot;
mod transform;

pub use field::{ScalarField, VectorField};
pub use grid::Grid3;
pub use norms::{
    field_norms, h2_norm, l1_norm, l2_norm, linf_norm, vector_h2_norm, vector_norms, NormReport,
};
pub use ops::{
    apply_fractional_symbol, apply_laplacian_power, convolve, convolve_spectra, double_symbol,
    fractional_symbol,
};
pub use random::{random_ball_sample, random_band_limited};
pub use transform::{
    forward_transform, fourier_prefactor, inverse_transform, Spectrum, SYMMETRY_TOLERANCE,
};
