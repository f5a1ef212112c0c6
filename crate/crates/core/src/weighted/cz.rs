//! Weighted bound for `ℛ∇· = ∇(-Δ)^{-1}∇·∇·` acting on tensor fields, and a
//! probe of the zeroth-order Riesz transform under the same weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::quadrature::ordered_sum;
use crate::field::{make_plateau, plateau, Grid, ScalarField, TensorField, WeightParams};
use crate::spectral::{cz_divergence, gradient, riesz_second};

fn weight(grid: &Grid, k: f64) -> Vec<f64> {
    grid.points().map(|x| crate::field::spatial_weight(x, k)).collect()
}

fn weighted(grid: &Grid, w: &[f64], f: impl Fn(usize) -> f64 + Sync) -> Result<f64> {
    let s = ordered_sum(w.len(), |i| w[i] * f(i)) * grid.cell_volume();
    if !s.is_finite() {
        return Err(Error::NonFinite("weighted integral".into()));
    }
    Ok(s)
}

/// `∫ (1+|x|^2)^{-k} |ℛ∇·F|^2`.
pub fn cz_lhs(f: &TensorField, k: f64) -> Result<f64> {
    WeightParams::check_cz_range(k)?;
    let grid = *f.grid();
    let r = cz_divergence(f);
    weighted(&grid, &weight(&grid, k), |i| r.components().iter().map(|c| c.data()[i].powi(2)).sum())
}

/// `∫ (1+|x|^2)^{-k} (|∇F|^2 + |F|^2)`.
pub fn cz_rhs(f: &TensorField, k: f64) -> Result<f64> {
    WeightParams::check_cz_range(k)?;
    let grid = *f.grid();
    let grads: Vec<_> = f.components().iter().map(gradient).collect();
    weighted(&grid, &weight(&grid, k), |i| {
        f.components()
            .iter()
            .zip(&grads)
            .map(|(c, g)| c.data()[i].powi(2) + g.components().iter().map(|gc| gc.data()[i].powi(2)).sum::<f64>())
            .sum()
    })
}

pub fn cz_ratio(f: &TensorField, k: f64) -> Result<f64> {
    let rhs = cz_rhs(f, k)?;
    if rhs == 0.0 {
        return Err(Error::Domain("the right-hand side vanishes for F = 0".into()));
    }
    Ok(cz_lhs(f, k)? / rhs)
}

/// `F = f e_1 ⊗ e_1`, the tensor whose divergence structure reduces to `∂_1∂_1`.
pub fn first_axis_tensor(f: &ScalarField) -> TensorField {
    let d = f.grid().dim();
    let mut comps = vec![ScalarField::zeros(*f.grid()); d * d];
    comps[0] = f.clone();
    TensorField::new(comps).expect("components share the grid")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApProbeRow {
    pub radius: f64,
    pub box_length: f64,
    pub grid_n: usize,
    /// `∫ w |R_11 f|^2 / ∫ w |f|^2` for the centered plateau.
    pub riesz_centered: f64,
    /// Same ratio for a plateau of radius `R/2` centered at distance `R` from the origin.
    pub riesz_offset: f64,
    /// `cz_ratio(f e_1⊗e_1)` for the two plateaus.
    pub divergence_centered: f64,
    pub divergence_offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApProbeReport {
    pub k: f64,
    pub dim: usize,
    pub rows: Vec<ApProbeRow>,
    /// Last over first value of each ratio across the radii.
    pub riesz_offset_growth: f64,
    pub divergence_offset_growth: f64,
}

fn riesz_ratio(f: &ScalarField, w: &[f64]) -> Result<f64> {
    let grid = *f.grid();
    let r0 = riesz_second(0, 0, f)?;
    Ok(weighted(&grid, w, |i| r0.data()[i].powi(2))? / weighted(&grid, w, |i| f.data()[i].powi(2))?)
}

/// Box side is `box_factor * R`. The centered plateau ramps down over `R/2`;
/// the offset plateau has radius `R/2`, ramp `R/4`, and sits at `(R, 0, 0)`.
///
/// Far from the origin the weight is small, while `R_11 f` has a tail that
/// reaches the origin, so the offset ratio can grow with `R`; a derivative on
/// the data side damps that tail by one power of `R`.
pub fn ap_failure_probe(k: f64, radii: &[f64], dim: usize, n: usize, box_factor: f64) -> Result<ApProbeReport> {
    WeightParams::check_cz_range(k)?;
    if radii.is_empty() {
        return Err(Error::InvalidParameter("no plateau radii given".into()));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        let length = box_factor * radius;
        let grid = Grid::new(dim, n, length)?;
        let centered = make_plateau(radius, 0.5 * radius, &grid)?;
        let c = [radius, 0.0, 0.0];
        if !grid.contains_ball(c, 0.75 * radius) {
            return Err(Error::Support(format!("offset plateau at distance {radius} does not fit in a box of side {length}")));
        }
        let offset = ScalarField::from_fn(grid, |x| {
            let d2: f64 = (0..3).map(|i| (x[i] - c[i]).powi(2)).sum();
            plateau(d2.sqrt(), 0.5 * radius, 0.25 * radius)
        })?;
        let w = weight(&grid, k);
        rows.push(ApProbeRow {
            radius,
            box_length: length,
            grid_n: n,
            riesz_centered: riesz_ratio(&centered, &w)?,
            riesz_offset: riesz_ratio(&offset, &w)?,
            divergence_centered: cz_ratio(&first_axis_tensor(&centered), k)?,
            divergence_offset: cz_ratio(&first_axis_tensor(&offset), k)?,
        });
    }
    let (first, last) = (rows[0], rows[rows.len() - 1]);
    Ok(ApProbeReport {
        k,
        dim,
        rows,
        riesz_offset_growth: last.riesz_offset / first.riesz_offset,
        divergence_offset_growth: last.divergence_offset / first.divergence_offset,
    })
}
