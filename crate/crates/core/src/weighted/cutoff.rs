//! Passage from compactly supported to bounded test functions: both sides of
//! the estimate for `η(x/m) u` as the cutoff radius `m` grows.

use serde::{Deserialize, Serialize};

use super::theorem::TheoremIntegrals;
use crate::error::{Error, Result};
use crate::field::weights::norm_squared;
use crate::field::{plateau, ScalarField, SpaceTimeField, WeightParams};

/// Relative Cauchy tolerance between the two largest cutoff radii.
pub const CUTOFF_CAUCHY_TOL: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffRow {
    pub m: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffReport {
    pub weight: WeightParams,
    pub rows: Vec<CutoffRow>,
    /// Relative change of each side between consecutive radii.
    pub lhs_steps: Vec<f64>,
    pub rhs_steps: Vec<f64>,
    pub converged: bool,
}

/// `η(y) = 1` on `|y| <= 1`, `0` on `|y| >= 2`.
pub fn cutoff_profile(y_norm: f64) -> f64 {
    plateau(y_norm, 1.0, 1.0)
}

fn relative_step(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs().max(b.abs())
    }
}

/// `m_values` must be increasing, and `η_m` must vanish before the box boundary.
pub fn cutoff_convergence_study(u: &SpaceTimeField, weight: &WeightParams, m_values: &[f64]) -> Result<CutoffReport> {
    if m_values.len() < 2 || m_values.windows(2).any(|w| w[1] <= w[0]) || m_values[0] <= 0.0 {
        return Err(Error::InvalidParameter("cutoff radii must be positive, increasing, and at least two".into()));
    }
    let grid = *u.grid();
    let largest = *m_values.last().expect("non-empty");
    if !grid.contains_ball([0.0; 3], 2.0 * largest) {
        return Err(Error::Support(format!(
            "cutoff radius {largest} needs a box of side greater than {}, got {}",
            4.0 * largest,
            grid.length()
        )));
    }
    let mut rows = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let eta = ScalarField::from_fn(grid, |x| cutoff_profile(norm_squared(x).sqrt() / m))?;
        let ints = TheoremIntegrals::from_frames(grid, *u.time_grid(), weight, |i| u.frame(i).pointwise_mul(&eta))?;
        let (lhs, rhs) = (ints.lhs(weight.a), ints.rhs(weight.a));
        rows.push(CutoffRow { m, lhs: lhs.to_f64(), rhs: rhs.to_f64(), ln_lhs: lhs.ln_abs, ln_rhs: rhs.ln_abs });
    }
    let steps = |f: fn(&CutoffRow) -> f64| rows.windows(2).map(|w| relative_step(f(&w[0]), f(&w[1]))).collect::<Vec<f64>>();
    let lhs_steps = steps(|r| r.lhs);
    let rhs_steps = steps(|r| r.rhs);
    let converged = rows.iter().all(|r| r.lhs.is_finite() && r.rhs.is_finite())
        && lhs_steps.last().is_some_and(|s| *s <= CUTOFF_CAUCHY_TOL)
        && rhs_steps.last().is_some_and(|s| *s <= CUTOFF_CAUCHY_TOL);
    Ok(CutoffReport { weight: *weight, rows, lhs_steps, rhs_steps, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_spacetime_bump, BumpSpec, Grid, SpatialExponent, TemporalSupport, TimeGrid};

    #[test]
    fn compact_support_makes_large_radii_exact() {
        let g = Grid::new(2, 32, 16.0).unwrap();
        let tg = TimeGrid::default_with_steps(16).unwrap();
        let spec = BumpSpec::spatial([0.5, 0.0, 0.0], 1.5, 1.0).with_temporal(TemporalSupport {
            center: 0.06,
            halfwidth: 0.035,
            amplitude: 1.0,
        });
        let u = make_spacetime_bump(&spec, &g, &tg).unwrap();
        let w = WeightParams::new(10.0, 2.0, SpatialExponent::SingleK).unwrap();
        let r = cutoff_convergence_study(&u, &w, &[1.0, 2.5, 3.0]).unwrap();
        assert_eq!(r.rows[1].lhs, r.rows[2].lhs);
        assert_eq!(r.rows[1].rhs, r.rows[2].rhs);
        assert!(r.converged);
        assert!(r.lhs_steps[0] > 0.0 && r.lhs_steps[1] == 0.0);
    }

    #[test]
    fn radius_beyond_box_is_rejected() {
        let g = Grid::new(2, 16, 8.0).unwrap();
        let tg = TimeGrid::default_with_steps(8).unwrap();
        let u = SpaceTimeField::zeros(g, tg);
        let w = WeightParams::new(1.0, 2.0, SpatialExponent::SingleK).unwrap();
        assert!(matches!(cutoff_convergence_study(&u, &w, &[1.0, 2.0]), Err(Error::Support(_))));
        assert!(cutoff_convergence_study(&u, &w, &[1.0]).is_err());
    }
}
