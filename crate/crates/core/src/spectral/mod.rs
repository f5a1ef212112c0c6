//! Pseudo-spectral operators on periodic grids.

pub mod fft;
pub mod multiplier;
pub mod ops;
pub mod random;

pub use fft::Spectrum;
pub use multiplier::{DealiasMask, SpectralMultiplier, Wavevectors};
pub use ops::{
    cz_divergence, curl, divergence, gradient, heat, heat_vector, hessian, inverse_neg_laplacian, laplacian, leray,
    partial, pressure_gradient, riesz_second, spectral_inner, tensor_divergence,
};
pub use random::{random_smooth_field, random_smooth_vector};
