//! Seeded random smooth periodic fields for property tests and experiments.

use rand::Rng;
use rustfft::num_complex::Complex64;

use super::fft::Spectrum;
use super::multiplier::Wavevectors;
use crate::field::{Grid, ScalarField, VectorField};

/// Low-pass filtered white noise with unit RMS.
///
/// The spectrum is damped by `exp(-|k|^2 / (2 width^2))` in integer
/// wavenumbers and cut to `|k| < N/3`, so no Nyquist content survives.
pub fn random_smooth_field(grid: Grid, rng: &mut impl Rng, width: f64) -> ScalarField {
    let noise: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut s = Spectrum::forward(&ScalarField::from_raw(grid, noise));
    let wv = Wavevectors::new(&grid);
    let n = grid.n() as i64;
    s.map_modes(|i, c| {
        let k2 = wv.index_squared(i);
        if 9 * k2 >= n * n {
            Complex64::new(0.0, 0.0)
        } else {
            c * (-(k2 as f64) / (2.0 * width * width)).exp()
        }
    });
    let f = s.inverse();
    let rms = (f.data().iter().map(|v| v * v).sum::<f64>() / grid.len() as f64).sqrt();
    if rms > 0.0 {
        f.scaled(1.0 / rms)
    } else {
        f
    }
}

pub fn random_smooth_vector(grid: Grid, rng: &mut impl Rng, width: f64) -> VectorField {
    let comps = (0..grid.dim()).map(|_| random_smooth_field(grid, rng, width)).collect();
    VectorField::new(comps).expect("components share one grid")
}
