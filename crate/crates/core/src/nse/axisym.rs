//! Cylindrical components, swirl, and rotation defects about the `x3` axis.

use crate::error::{Error, Result};
use crate::field::quadrature::ordered_sum;
use crate::field::{Grid, Point, ScalarField, VectorField};
use crate::field::{make_bump, BumpSpec};
use crate::spectral::{gradient, leray};

/// Cylindrical components sampled at the Cartesian lattice points.
#[derive(Clone, Debug, PartialEq)]
pub struct CylindricalDecomposition {
    pub u_r: ScalarField,
    pub u_theta: ScalarField,
    pub u_z: ScalarField,
    /// Points with `r` below this are on the excluded axis tube; their radial
    /// and azimuthal values are set to zero.
    pub axis_tube: f64,
}

/// `2 dx`.
pub fn axis_tube_radius(grid: &Grid) -> f64 {
    2.0 * grid.spacing()
}

fn require_3d(grid: &Grid) -> Result<()> {
    if grid.dim() != 3 {
        return Err(Error::InvalidParameter(format!("cylindrical diagnostics need dim = 3, got {}", grid.dim())));
    }
    Ok(())
}

fn radius(x: Point) -> f64 {
    x[0].hypot(x[1])
}

pub fn cylindrical_decompose(u: &VectorField) -> Result<CylindricalDecomposition> {
    let grid = *u.grid();
    require_3d(&grid)?;
    let tube = axis_tube_radius(&grid);
    let (mut ur, mut ut) = (vec![0.0; grid.len()], vec![0.0; grid.len()]);
    for i in 0..grid.len() {
        let x = grid.point(i);
        let r = radius(x);
        if r >= tube {
            let v = u.at(i);
            ur[i] = (x[0] * v[0] + x[1] * v[1]) / r;
            ut[i] = (x[0] * v[1] - x[1] * v[0]) / r;
        }
    }
    Ok(CylindricalDecomposition {
        u_r: ScalarField::new(grid, ur)?,
        u_theta: ScalarField::new(grid, ut)?,
        u_z: u.component(2).clone(),
        axis_tube: tube,
    })
}

impl CylindricalDecomposition {
    /// `u_r e_r + u_theta e_theta + u_z e_z`; zero horizontal part on the tube.
    pub fn reassemble(&self) -> VectorField {
        let grid = *self.u_r.grid();
        let comp = |axis: usize| {
            let data = (0..grid.len())
                .map(|i| {
                    let x = grid.point(i);
                    let r = radius(x);
                    if r < self.axis_tube {
                        return 0.0;
                    }
                    let (c, s) = (x[0] / r, x[1] / r);
                    let (a, b) = (self.u_r.data()[i], self.u_theta.data()[i]);
                    if axis == 0 {
                        a * c - b * s
                    } else {
                        a * s + b * c
                    }
                })
                .collect();
            ScalarField::new(grid, data).expect("length matches")
        };
        VectorField::new(vec![comp(0), comp(1), self.u_z.clone()]).expect("components share one grid")
    }
}

/// Lattice points with `|x| < L/4` and `r >= 2 dx`.
fn diagnostic_region(grid: &Grid) -> Vec<usize> {
    let (ball, tube) = (0.25 * grid.length(), axis_tube_radius(grid));
    (0..grid.len())
        .filter(|&i| {
            let x = grid.point(i);
            radius(x) >= tube && (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() < ball
        })
        .collect()
}

/// `‖u_theta‖² / ‖u‖²` over the inner ball minus the axis tube; zero for `u = 0` there.
pub fn swirl_fraction(u: &VectorField) -> Result<f64> {
    let cyl = cylindrical_decompose(u)?;
    let region = diagnostic_region(u.grid());
    let swirl = ordered_sum(region.len(), |j| cyl.u_theta.data()[region[j]].powi(2));
    let total = ordered_sum(region.len(), |j| {
        let v = u.at(region[j]);
        v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
    });
    Ok(if total == 0.0 { 0.0 } else { swirl / total })
}

/// Periodic trilinear interpolation of a scalar field at an arbitrary point.
pub fn trilinear(f: &ScalarField, x: Point) -> f64 {
    let grid = f.grid();
    let (n, h, half) = (grid.n(), grid.spacing(), 0.5 * grid.length());
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for axis in 0..3 {
        let s = (x[axis] + half) / h;
        let fl = s.floor();
        base[axis] = (fl as i64).rem_euclid(n as i64) as usize;
        frac[axis] = s - fl;
    }
    let d = f.data();
    let mut acc = 0.0;
    for corner in 0..8 {
        let mut w = 1.0;
        let mut idx = [0usize; 3];
        for axis in 0..3 {
            let up = (corner >> axis) & 1 == 1;
            w *= if up { frac[axis] } else { 1.0 - frac[axis] };
            idx[axis] = if up { (base[axis] + 1) % n } else { base[axis] };
        }
        acc += w * d[grid.flat_index(idx)];
    }
    acc
}

/// `max_φ ‖R_φ u(R_{-φ} x) - u(x)‖₂` over the ball `|x| < L/4`.
///
/// The rotated samples are trilinear interpolants, so an exactly
/// axisymmetric continuum field reports an `O(dx²)` defect. `φ = 0` is the
/// identity and contributes zero.
pub fn symmetry_defect(u: &VectorField, angles: &[f64]) -> Result<f64> {
    let grid = *u.grid();
    require_3d(&grid)?;
    let ball = 0.25 * grid.length();
    let region: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let x = grid.point(i);
            (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() < ball
        })
        .collect();
    let mut worst: f64 = 0.0;
    for &phi in angles {
        if phi == 0.0 {
            continue;
        }
        let (c, s) = (phi.cos(), phi.sin());
        let sq = ordered_sum(region.len(), |j| {
            let i = region[j];
            let x = grid.point(i);
            // R_{-φ} x
            let y = [c * x[0] + s * x[1], -s * x[0] + c * x[1], x[2]];
            let w = [trilinear(u.component(0), y), trilinear(u.component(1), y), trilinear(u.component(2), y)];
            let rotated = [c * w[0] - s * w[1], s * w[0] + c * w[1], w[2]];
            let v = u.at(i);
            (0..3).map(|a| (rotated[a] - v[a]).powi(2)).sum()
        });
        worst = worst.max((sq * grid.cell_volume()).sqrt());
    }
    Ok(worst)
}

/// Default rotation angles: none of them maps the lattice to itself.
pub const DEFAULT_ANGLES: [f64; 3] = [0.3, 0.7853981633974483, 1.9];

/// Divergence-free, swirl-free field `∇×(φ(x) (-x2, x1, 0))` with
/// `φ = amplitude exp(-|x|²/width²)`, Leray-projected onto the lattice.
///
/// In cylindrical form `u_r = -r ∂zφ`, `u_theta = 0`, `u_z = 2φ + r ∂rφ`.
pub fn axisymmetric_no_swirl(grid: Grid, amplitude: f64, width: f64) -> Result<VectorField> {
    require_3d(&grid)?;
    if !(width > 0.0) || !grid.contains_ball([0.0; 3], 3.0 * width) {
        return Err(Error::Support(format!("width {width} is not well inside a box of side {}", grid.length())));
    }
    let s2 = width * width;
    let u = VectorField::from_fn(grid, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let phi = amplitude * (-(r2 + x[2] * x[2]) / s2).exp();
        [2.0 * x[0] * x[2] / s2 * phi, 2.0 * x[1] * x[2] / s2 * phi, (2.0 - 2.0 * r2 / s2) * phi]
    })?;
    Ok(leray(&u))
}

/// `(∂2 b, -∂1 b, 0)` for a compact bump `b` of the given radius, scaled to
/// discrete L² norm `size`. Divergence-free, and purely azimuthal about the
/// bump's own vertical axis, so off the `x3` axis it breaks the rotation symmetry.
pub fn localized_swirl(grid: Grid, center: Point, radius: f64, size: f64) -> Result<VectorField> {
    require_3d(&grid)?;
    let b = make_bump(&BumpSpec::spatial(center, radius, 1.0), &grid)?;
    let g = gradient(&b);
    let p = VectorField::new(vec![g.component(1).clone(), g.component(0).scaled(-1.0), ScalarField::zeros(grid)])?;
    Ok(p.scaled(size / p.l2_norm()))
}
