//! Unitary real-to-complex transforms on periodic grids.
//!
//! The half spectrum keeps `N/2 + 1` modes along the last axis and all `N`
//! modes along the others, stored row-major with the last axis fastest.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField};

struct Plans {
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut real = RealFftPlanner::<f64>::new();
            let mut complex = FftPlanner::<f64>::new();
            Arc::new(Plans {
                r2c: real.plan_fft_forward(n),
                c2r: real.plan_fft_inverse(n),
                forward: complex.plan_fft_forward(n),
                inverse: complex.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Rows handed to one rayon task in the row transforms.
const ROWS_PER_TASK: usize = 64;
const TRANSPOSE_BLOCK: usize = 32;

/// Half-spectrum coefficients of a real field.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    data: Vec<Complex64>,
}

/// Number of stored modes along the last axis.
pub fn half_len(n: usize) -> usize {
    n / 2 + 1
}

pub fn spectrum_len(grid: &Grid) -> usize {
    grid.len() / grid.n() * half_len(grid.n())
}

impl Spectrum {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![Complex64::new(0.0, 0.0); spectrum_len(&grid)] }
    }

    pub fn from_data(grid: Grid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != spectrum_len(&grid) {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a half spectrum of {}",
                data.len(),
                spectrum_len(&grid)
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn forward(f: &ScalarField) -> Self {
        let grid = *f.grid();
        let n = grid.n();
        let h = half_len(n);
        let p = plans(n);
        let mut data = vec![Complex64::new(0.0, 0.0); spectrum_len(&grid)];
        data.par_chunks_mut(h * ROWS_PER_TASK)
            .zip(f.data().par_chunks(n * ROWS_PER_TASK))
            .for_each(|(out, inp)| {
                let mut buf = vec![0.0; n];
                let mut scratch = p.r2c.make_scratch_vec();
                for (orow, irow) in out.chunks_mut(h).zip(inp.chunks(n)) {
                    buf.copy_from_slice(irow);
                    p.r2c
                        .process_with_scratch(&mut buf, orow, &mut scratch)
                        .expect("row lengths match the plan");
                }
            });
        transform_leading_axes(&mut data, &grid, &p.forward);
        let scale = (n as f64).powf(-0.5 * grid.dim() as f64);
        data.par_iter_mut().for_each(|c| *c *= scale);
        Self { grid, data }
    }

    pub fn inverse(&self) -> ScalarField {
        let grid = self.grid;
        let n = grid.n();
        let h = half_len(n);
        let p = plans(n);
        let mut data = self.data.clone();
        transform_leading_axes(&mut data, &grid, &p.inverse);
        let scale = (n as f64).powf(-0.5 * grid.dim() as f64);
        let mut out = vec![0.0; grid.len()];
        out.par_chunks_mut(n * ROWS_PER_TASK)
            .zip(data.par_chunks_mut(h * ROWS_PER_TASK))
            .for_each(|(o, inp)| {
                let mut scratch = p.c2r.make_scratch_vec();
                for (orow, irow) in o.chunks_mut(n).zip(inp.chunks_mut(h)) {
                    // rounding leaves tiny imaginary parts on self-conjugate modes
                    irow[0].im = 0.0;
                    irow[h - 1].im = 0.0;
                    p.c2r
                        .process_with_scratch(irow, orow, &mut scratch)
                        .expect("row lengths match the plan");
                    for v in orow.iter_mut() {
                        *v *= scale;
                    }
                }
            });
        ScalarField::from_raw(grid, out)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn scale(&mut self, c: f64) {
        self.data.par_iter_mut().for_each(|v| *v *= c);
    }

    pub fn axpy(&mut self, c: f64, other: &Spectrum) {
        debug_assert_eq!(self.grid, other.grid);
        self.data
            .par_iter_mut()
            .zip(other.data.par_iter())
            .for_each(|(a, b)| *a += b * c);
    }

    /// Replaces each coefficient by `f(flat_index, coefficient)`.
    pub fn map_modes(&mut self, f: impl Fn(usize, Complex64) -> Complex64 + Sync) {
        self.data
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, c)| *c = f(i, *c));
    }

    /// Discrete L² pairing `Σ f g dx^dim` computed from two half spectra.
    pub fn pairing(&self, other: &Spectrum) -> f64 {
        let h = half_len(self.grid.n());
        let n = self.grid.n();
        let s = crate::field::quadrature::ordered_sum(self.data.len(), |i| {
            let j = i % h;
            let w = if j == 0 || j == n / 2 { 1.0 } else { 2.0 };
            w * (self.data[i] * other.data[i].conj()).re
        });
        s * self.grid.cell_volume()
    }
}

/// Complex transforms along every axis except the last.
fn transform_leading_axes(data: &mut [Complex64], grid: &Grid, fft: &Arc<dyn Fft<f64>>) {
    let n = grid.n();
    let h = half_len(n);
    match grid.dim() {
        2 => transform_first_axis(data, n, h, fft),
        _ => {
            data.par_chunks_mut(n * h)
                .for_each(|slab| transform_first_axis(slab, n, h, fft));
            transform_first_axis(data, n, n * h, fft);
        }
    }
}

/// Transforms the columns of a `rows x cols` matrix by transposing, running
/// contiguous transforms of length `rows`, and transposing back.
fn transform_first_axis(data: &mut [Complex64], rows: usize, cols: usize, fft: &Arc<dyn Fft<f64>>) {
    let mut t = vec![Complex64::new(0.0, 0.0); rows * cols];
    transpose(data, &mut t, rows, cols);
    let batch = rows * ROWS_PER_TASK;
    t.par_chunks_mut(batch).for_each(|chunk| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(chunk, &mut scratch);
    });
    transpose(&t, data, cols, rows);
}

/// `dst[c * rows + r] = src[r * cols + c]`, blocked for cache reuse.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for rb in (0..rows).step_by(TRANSPOSE_BLOCK) {
        for cb in (0..cols).step_by(TRANSPOSE_BLOCK) {
            for r in rb..(rb + TRANSPOSE_BLOCK).min(rows) {
                for c in cb..(cb + TRANSPOSE_BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}
