//! Frequency lattices, Fourier multipliers and the dealiasing mask.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::fft::{half_len, spectrum_len, Spectrum};
use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField};

/// Integer and physical wavevectors of the half spectrum.
///
/// Nyquist components are mapped to zero wavenumber in [`Wavevectors::xi`]:
/// their sign is ambiguous, and a zero keeps every odd multiplier real-valued
/// on real fields and `div(grad) = laplacian` exact.
#[derive(Clone, Copy, Debug)]
pub struct Wavevectors {
    dim: usize,
    n: usize,
    h: usize,
    scale: f64,
}

impl Wavevectors {
    pub fn new(grid: &Grid) -> Self {
        Self {
            dim: grid.dim(),
            n: grid.n(),
            h: half_len(grid.n()),
            scale: std::f64::consts::TAU / grid.length(),
        }
    }

    /// Signed integer wavenumbers; a Nyquist entry is reported as `+N/2`.
    pub fn index(&self, flat: usize) -> [i64; 3] {
        let n = self.n as i64;
        let signed = |j: usize| {
            let j = j as i64;
            if j > n / 2 {
                j - n
            } else {
                j
            }
        };
        match self.dim {
            2 => [signed(flat / self.h), (flat % self.h) as i64, 0],
            _ => [signed(flat / (self.n * self.h)), signed((flat / self.h) % self.n), (flat % self.h) as i64, ],
        }
    }

    pub fn is_nyquist(&self, flat: usize) -> bool {
        let half = (self.n / 2) as i64;
        self.index(flat).iter().take(self.dim).any(|k| *k == half)
    }

    /// Physical wavevector `2 pi k / L` with Nyquist components set to zero.
    pub fn xi(&self, flat: usize) -> [f64; 3] {
        let half = (self.n / 2) as i64;
        let k = self.index(flat);
        let mut xi = [0.0; 3];
        for d in 0..self.dim {
            if k[d] != half {
                xi[d] = self.scale * k[d] as f64;
            }
        }
        xi
    }

    pub fn xi_squared(&self, flat: usize) -> f64 {
        let xi = self.xi(flat);
        xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
    }

    /// Squared integer wavenumber, Nyquist included.
    pub fn index_squared(&self, flat: usize) -> i64 {
        let k = self.index(flat);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }
}

/// A Fourier multiplier sampled on the half spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMultiplier {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SpectralMultiplier {
    /// Samples `m(xi)`; the zero-frequency value is whatever `m` returns at `xi = 0`.
    pub fn from_fn(grid: Grid, m: impl Fn([f64; 3]) -> Complex64 + Sync) -> Self {
        let wv = Wavevectors::new(&grid);
        let values = (0..spectrum_len(&grid))
            .into_par_iter()
            .map(|i| m(wv.xi(i)))
            .collect();
        Self { grid, values }
    }

    pub fn real(grid: Grid, m: impl Fn([f64; 3]) -> f64 + Sync) -> Self {
        Self::from_fn(grid, |xi| Complex64::new(m(xi), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn apply_spectrum(&self, s: &mut Spectrum) -> Result<()> {
        if *s.grid() != self.grid {
            return Err(Error::ShapeMismatch("multiplier and spectrum on different grids".into()));
        }
        s.data_mut()
            .par_iter_mut()
            .zip(self.values.par_iter())
            .for_each(|(c, m)| *c *= m);
        Ok(())
    }

    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        let mut s = Spectrum::forward(f);
        self.apply_spectrum(&mut s)?;
        Ok(s.inverse())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("multipliers on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Checks `m(-xi) = conj(m(xi))` on the self-conjugate planes of the half
    /// spectrum, where both `xi` and `-xi` are stored.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let wv = Wavevectors::new(&self.grid);
        let n = self.grid.n();
        let h = half_len(n);
        (0..self.values.len()).all(|i| {
            let j = i % h;
            if j != 0 && j != n / 2 {
                return true;
            }
            let k = wv.index(i);
            let neg = |v: i64| ((n as i64 - v) % n as i64) as usize;
            let mirror = match self.grid.dim() {
                2 => neg(k[0].rem_euclid(n as i64)) * h + j,
                _ => (neg(k[0].rem_euclid(n as i64)) * n + neg(k[1].rem_euclid(n as i64))) * h + j,
            };
            (self.values[mirror] - self.values[i].conj()).norm() <= tol * (1.0 + self.values[i].norm())
        })
    }
}

/// Two-thirds rule: keeps integer wavevectors with `|k| < N/3`.
#[derive(Clone, Debug, PartialEq)]
pub struct DealiasMask {
    grid: Grid,
    keep: Vec<bool>,
}

impl DealiasMask {
    pub fn two_thirds(grid: Grid) -> Self {
        let wv = Wavevectors::new(&grid);
        let n = grid.n() as i64;
        // |k|^2 < (N/3)^2  <=>  9 |k|^2 < N^2
        let keep = (0..spectrum_len(&grid)).map(|i| 9 * wv.index_squared(i) < n * n).collect();
        Self { grid, keep }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn keeps(&self, flat: usize) -> bool {
        self.keep[flat]
    }

    pub fn apply(&self, s: &mut Spectrum) {
        s.data_mut()
            .par_iter_mut()
            .zip(self.keep.par_iter())
            .for_each(|(c, k)| {
                if !k {
                    *c = Complex64::new(0.0, 0.0);
                }
            });
    }

    pub fn kept_modes(&self) -> usize {
        self.keep.iter().filter(|k| **k).count()
    }
}
