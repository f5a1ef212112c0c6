//! Flat binary field container.
//!
//! Layout, all little-endian: `dim: u64`, `N: u64`, `L: f64`, `M: u64`,
//! `T-: f64`, `T+: f64`, then `(M+1) * components * N^dim` samples as `f64`,
//! frame-major, then component-major, then row-major. Static fields use
//! `M = 0`, `T- = T+ = 0`. The component count is inferred from the length.

use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::fields::{ScalarField, SpaceTimeField, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};

const HEADER_BYTES: usize = 48;

#[derive(Clone, Debug, PartialEq)]
pub struct FieldContainer {
    pub grid: Grid,
    pub steps: u64,
    pub t_minus: f64,
    pub t_plus: f64,
    pub components: usize,
    pub samples: Vec<f64>,
}

impl FieldContainer {
    pub fn frames(&self) -> usize {
        self.steps as usize + 1
    }

    pub fn from_scalar(f: &ScalarField) -> Self {
        Self::static_field(*f.grid(), 1, f.data().to_vec())
    }

    pub fn from_vector(u: &VectorField) -> Self {
        let samples = u.components().iter().flat_map(|c| c.data().iter().copied()).collect();
        Self::static_field(*u.grid(), u.dim(), samples)
    }

    pub fn from_spacetime(f: &SpaceTimeField) -> Self {
        let tg = f.time_grid();
        Self {
            grid: *f.grid(),
            steps: tg.steps() as u64,
            t_minus: tg.t_minus(),
            t_plus: tg.t_plus(),
            components: 1,
            samples: f.frames().iter().flat_map(|fr| fr.data().iter().copied()).collect(),
        }
    }

    /// Snapshots of a vector field at uniformly spaced times `t0..=t1`.
    pub fn from_snapshots(snapshots: &[VectorField], t0: f64, t1: f64) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::Format("no snapshots to store".into()))?;
        let grid = *first.grid();
        let mut samples = Vec::with_capacity(snapshots.len() * grid.len() * first.dim());
        for s in snapshots {
            if *s.grid() != grid {
                return Err(Error::ShapeMismatch("snapshots on different grids".into()));
            }
            for c in s.components() {
                samples.extend_from_slice(c.data());
            }
        }
        Ok(Self {
            grid,
            steps: snapshots.len() as u64 - 1,
            t_minus: t0,
            t_plus: t1,
            components: first.dim(),
            samples,
        })
    }

    fn static_field(grid: Grid, components: usize, samples: Vec<f64>) -> Self {
        Self { grid, steps: 0, t_minus: 0.0, t_plus: 0.0, components, samples }
    }

    /// Component `c` of frame `m` as a scalar field.
    pub fn scalar(&self, m: usize, c: usize) -> Result<ScalarField> {
        if m >= self.frames() || c >= self.components {
            return Err(Error::Format(format!("no frame {m} component {c}")));
        }
        let len = self.grid.len();
        let start = (m * self.components + c) * len;
        ScalarField::new(self.grid, self.samples[start..start + len].to_vec())
    }

    pub fn vector(&self, m: usize) -> Result<VectorField> {
        VectorField::new((0..self.components).map(|c| self.scalar(m, c)).collect::<Result<_>>()?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + 8 * self.samples.len());
        out.extend_from_slice(&(self.grid.dim() as u64).to_le_bytes());
        out.extend_from_slice(&(self.grid.n() as u64).to_le_bytes());
        out.extend_from_slice(&self.grid.length().to_le_bytes());
        out.extend_from_slice(&self.steps.to_le_bytes());
        out.extend_from_slice(&self.t_minus.to_le_bytes());
        out.extend_from_slice(&self.t_plus.to_le_bytes());
        for v in &self.samples {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_BYTES || (bytes.len() - HEADER_BYTES) % 8 != 0 {
            return Err(Error::Format(format!("{} bytes is not a valid container length", bytes.len())));
        }
        let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().expect("8-byte slice") };
        let dim = u64::from_le_bytes(word(0)) as usize;
        let n = u64::from_le_bytes(word(1)) as usize;
        let length = f64::from_le_bytes(word(2));
        let steps = u64::from_le_bytes(word(3));
        let t_minus = f64::from_le_bytes(word(4));
        let t_plus = f64::from_le_bytes(word(5));
        let grid = Grid::new(dim, n, length).map_err(|e| Error::Format(e.to_string()))?;
        let samples: Vec<f64> = bytes[HEADER_BYTES..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let per_component = grid.len() * (steps as usize + 1);
        if samples.is_empty() || samples.len() % per_component != 0 {
            return Err(Error::Format(format!(
                "{} samples do not divide into frames of {} points",
                samples.len(),
                per_component
            )));
        }
        Ok(Self { grid, steps, t_minus, t_plus, components: samples.len() / per_component, samples })
    }

    pub fn write_to(&self, path: &Path) -> Result<String> {
        let bytes = self.to_bytes();
        std::fs::File::create(path)?.write_all(&bytes)?;
        Ok(sha256_hex(&bytes))
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    /// SHA-256 of the serialized bytes, lowercase hex.
    pub fn content_hash(&self) -> String {
        sha256_hex(&self.to_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
