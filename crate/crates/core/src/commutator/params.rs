use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::weights::norm_squared;
use crate::field::{Grid, Point, ScalarField, TimeGrid, WeightParams};

/// Everything the conjugated heat operator depends on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlemanParams {
    pub weight: WeightParams,
    pub grid: Grid,
    pub time_grid: TimeGrid,
}

impl CarlemanParams {
    pub fn new(weight: WeightParams, grid: Grid, time_grid: TimeGrid) -> Result<Self> {
        if !time_grid.is_small_horizon() {
            return Err(Error::InvalidTimeGrid(format!(
                "T+ = {} is outside the short-horizon regime",
                time_grid.t_plus()
            )));
        }
        Ok(Self { weight, grid, time_grid })
    }

    pub fn a(&self) -> f64 {
        self.weight.a
    }

    pub fn k(&self) -> f64 {
        self.weight.k
    }

    pub fn n(&self) -> usize {
        self.grid.dim()
    }
}

/// `V1(x) = 64k|x|^2/q^3 - (16kn+32k)/q^2`, `q = 1 + |x|^2`.
pub fn v1(x: Point, k: f64, n: usize) -> f64 {
    let r2 = norm_squared(x);
    let q = 1.0 + r2;
    let n = n as f64;
    64.0 * k * r2 / q.powi(3) - (16.0 * k * n + 32.0 * k) / (q * q)
}

/// `V2(x) = -(4n+8)kn/q^2 + (32kn+64k-32k^3)|x|^2/q^3 + (64k^3-96k)|x|^4/q^4`.
pub fn v2(x: Point, k: f64, n: usize) -> f64 {
    let r2 = norm_squared(x);
    let q = 1.0 + r2;
    let n = n as f64;
    let k3 = k * k * k;
    -(4.0 * n + 8.0) * k * n / (q * q) + (32.0 * k * n + 64.0 * k - 32.0 * k3) * r2 / q.powi(3)
        + (64.0 * k3 - 96.0 * k) * r2 * r2 / q.powi(4)
}

/// Samples of the two commutator potentials.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialProfile {
    pub v1_samples: ScalarField,
    pub v2_samples: ScalarField,
}

impl PotentialProfile {
    pub fn new(grid: Grid, k: f64) -> Result<Self> {
        let n = grid.dim();
        Ok(Self {
            v1_samples: ScalarField::from_fn(grid, |x| v1(x, k, n))?,
            v2_samples: ScalarField::from_fn(grid, |x| v2(x, k, n))?,
        })
    }
}

/// Analytic spatial coefficients of L, J, K and [J,K], sampled once per grid.
#[derive(Clone, Debug)]
pub(crate) struct Coefficients {
    /// `4k x_i / q`
    pub drift: Vec<Vec<f64>>,
    /// `4k^2 |x|^2 / q^2`
    pub c_j: Vec<f64>,
    /// `2k (n/q - 2|x|^2/q^2)`
    pub c_k: Vec<f64>,
    /// `8k / q`
    pub lap: Vec<f64>,
    /// `16k x_i x_j / q^2`, row-major
    pub hess: Vec<Vec<f64>>,
    /// `V1(x) x_i`
    pub v1x: Vec<Vec<f64>>,
    pub v2: Vec<f64>,
}

impl Coefficients {
    pub fn new(grid: &Grid, k: f64) -> Self {
        let d = grid.dim();
        let n = d as f64;
        let pts: Vec<Point> = grid.points().collect();
        let q = |x: &Point| 1.0 + norm_squared(*x);
        let field = |f: &dyn Fn(&Point) -> f64| pts.iter().map(f).collect::<Vec<f64>>();
        Self {
            drift: (0..d).map(|i| field(&|x| 4.0 * k * x[i] / q(x))).collect(),
            c_j: field(&|x| 4.0 * k * k * norm_squared(*x) / q(x).powi(2)),
            c_k: field(&|x| 2.0 * k * (n / q(x) - 2.0 * norm_squared(*x) / q(x).powi(2))),
            lap: field(&|x| 8.0 * k / q(x)),
            hess: (0..d * d)
                .map(|ij| field(&|x| 16.0 * k * x[ij / d] * x[ij % d] / q(x).powi(2)))
                .collect(),
            v1x: (0..d).map(|i| field(&|x| v1(*x, k, d) * x[i])).collect(),
            v2: field(&|x| v2(*x, k, d)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potentials_at_origin() {
        assert_eq!(v1([0.0; 3], 2.0, 3), -160.0);
        assert_eq!(v2([0.0; 3], 2.0, 3), -120.0);
        assert_eq!(v1([0.3, 0.1, 0.0], 0.0, 2), 0.0);
    }

    #[test]
    fn profile_matches_closed_form() {
        let g = Grid::new(3, 8, 3.0).unwrap();
        let p = PotentialProfile::new(g, 1.5).unwrap();
        for (i, x) in g.points().enumerate() {
            assert_eq!(p.v1_samples.data()[i], v1(x, 1.5, 3));
            assert_eq!(p.v2_samples.data()[i], v2(x, 1.5, 3));
        }
    }
}
