//! Two solutions from different data, marched side by side, and their weighted
//! distance `∫ (1+|x|²)^{-k} |u1 - u2|²` over time.

use serde::{Deserialize, Serialize};

use super::solver::MildSolverConfig;
use super::trajectory::{DiagnosticOptions, Marcher};
use crate::error::{Error, Result};
use crate::field::quadrature::ordered_sum;
use crate::field::{spatial_weight, VectorField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub k: f64,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    /// Set when either run stopped early; the series then ends at the last common step.
    pub truncated: bool,
    pub abort_reason: Option<String>,
}

impl SeparationReport {
    pub fn final_distance(&self) -> f64 {
        *self.distances.last().expect("the initial distance is always recorded")
    }

    /// All recorded distances are exactly zero.
    pub fn identically_zero(&self) -> bool {
        self.distances.iter().all(|d| *d == 0.0)
    }
}

/// `Σ (1+|x|²)^{-k} |u1 - u2|² dx^dim`.
pub fn weighted_distance(u1: &VectorField, u2: &VectorField, k: f64) -> Result<f64> {
    if u1.grid() != u2.grid() || u1.dim() != u2.dim() {
        return Err(Error::ShapeMismatch("the two velocities differ in shape".into()));
    }
    let grid = *u1.grid();
    let s = ordered_sum(grid.len(), |i| {
        let (a, b) = (u1.at(i), u2.at(i));
        let d2: f64 = (0..3).map(|c| (a[c] - b[c]).powi(2)).sum();
        spatial_weight(grid.point(i), k) * d2
    });
    Ok(s * grid.cell_volume())
}

/// Marches both fields with the same configuration and records their distance each step.
pub fn separation_track(u1_0: &VectorField, u2_0: &VectorField, config: &MildSolverConfig, k: f64) -> Result<SeparationReport> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("weight exponent must be non-negative, got {k}")));
    }
    let steps = config.steps()?;
    let mut a = Marcher::new(u1_0, config, DiagnosticOptions::default())?;
    let mut b = Marcher::new(u2_0, config, DiagnosticOptions::default())?;
    let mut times = vec![0.0];
    let mut distances = vec![weighted_distance(a.field(), b.field(), k)?];
    let mut abort_reason = None;
    for _ in 0..steps {
        let (ra, rb) = rayon::join(|| a.advance(), || b.advance());
        if let Err(e) = ra.and(rb) {
            abort_reason = Some(e.to_string());
            break;
        }
        times.push(a.time());
        distances.push(weighted_distance(a.field(), b.field(), k)?);
    }
    Ok(SeparationReport { k, times, distances, truncated: abort_reason.is_some(), abort_reason })
}
