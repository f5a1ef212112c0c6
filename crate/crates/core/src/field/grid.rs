use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest final time accepted by [`TimeGrid::new`]. The weighted estimate is
/// only claimed for a short horizon; longer horizons go through
/// [`TimeGrid::exploratory`].
pub const MAX_SMALL_HORIZON: f64 = 0.5;

/// Default time window `(T-, T+)` used by the weighted-estimate experiments.
pub const DEFAULT_T_MINUS: f64 = 0.02;
pub const DEFAULT_T_PLUS: f64 = 0.1;

/// A point in physical space. Two-dimensional grids leave the third entry at 0.
pub type Point = [f64; 3];

/// Uniform periodic lattice on the box `[-L/2, L/2)^dim`.
///
/// Samples are stored row-major with the last axis varying fastest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and at least 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {length}")));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Total number of lattice points, `N^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `dx^dim` of the rectangle rule.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinate of lattice index `i` along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.spacing()
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        match self.dim {
            2 => [flat / n, flat % n, 0],
            _ => [flat / (n * n), (flat / n) % n, flat % n],
        }
    }

    pub fn flat_index(&self, idx: [usize; 3]) -> usize {
        let n = self.n;
        match self.dim {
            2 => idx[0] * n + idx[1],
            _ => (idx[0] * n + idx[1]) * n + idx[2],
        }
    }

    pub fn point(&self, flat: usize) -> Point {
        let idx = self.multi_index(flat);
        let mut p = [0.0; 3];
        for (axis, slot) in p.iter_mut().enumerate().take(self.dim) {
            *slot = self.coordinate(idx[axis]);
        }
        p
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Whether a ball of `radius` around `center` lies strictly inside the box.
    pub fn contains_ball(&self, center: Point, radius: f64) -> bool {
        let half = 0.5 * self.length;
        center
            .iter()
            .take(self.dim)
            .all(|c| c - radius > -half && c + radius < half)
    }
}

/// Uniform time lattice `t_m = T- + m dt`, `m = 0..=M`, with `0 < T- < T+`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_minus: f64,
    t_plus: f64,
    steps: usize,
}

impl TimeGrid {
    /// Short-horizon time grid; rejects `T+ > 0.5`.
    pub fn new(t_minus: f64, t_plus: f64, steps: usize) -> Result<Self> {
        if t_plus > MAX_SMALL_HORIZON {
            return Err(Error::InvalidTimeGrid(format!(
                "T+ = {t_plus} exceeds the short-horizon limit {MAX_SMALL_HORIZON}; use an exploratory grid"
            )));
        }
        Self::exploratory(t_minus, t_plus, steps)
    }

    /// Time grid without the short-horizon cap, for sweeps over `T+`.
    pub fn exploratory(t_minus: f64, t_plus: f64, steps: usize) -> Result<Self> {
        if !(t_minus.is_finite() && t_plus.is_finite()) || t_minus <= 0.0 || t_plus <= t_minus {
            return Err(Error::InvalidTimeGrid(format!(
                "need 0 < T- < T+, got T- = {t_minus}, T+ = {t_plus}"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidTimeGrid(format!("need at least 2 steps, got {steps}")));
        }
        Ok(Self { t_minus, t_plus, steps })
    }

    pub fn default_with_steps(steps: usize) -> Result<Self> {
        Self::new(DEFAULT_T_MINUS, DEFAULT_T_PLUS, steps)
    }

    pub fn t_minus(&self) -> f64 {
        self.t_minus
    }

    pub fn t_plus(&self) -> f64 {
        self.t_plus
    }

    /// Number of intervals `M`; there are `M + 1` frames.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn frames(&self) -> usize {
        self.steps + 1
    }

    pub fn dt(&self) -> f64 {
        (self.t_plus - self.t_minus) / self.steps as f64
    }

    pub fn time(&self, m: usize) -> f64 {
        if m == self.steps {
            self.t_plus
        } else {
            self.t_minus + m as f64 * self.dt()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |m| self.time(m))
    }

    /// Trapezoid weights in time (without the `dt` factor).
    pub fn trapezoid_weight(&self, m: usize) -> f64 {
        if m == 0 || m == self.steps {
            0.5
        } else {
            1.0
        }
    }

    pub fn is_small_horizon(&self) -> bool {
        self.t_plus <= MAX_SMALL_HORIZON
    }

    /// Same window with `2M` intervals.
    pub fn refined(&self) -> Self {
        Self { steps: 2 * self.steps, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(1, 16, 1.0).is_err());
        assert!(Grid::new(3, 7, 1.0).is_err());
        assert!(Grid::new(3, 6, 1.0).is_err());
        assert!(Grid::new(2, 16, 0.0).is_err());
        assert!(Grid::new(2, 16, f64::NAN).is_err());
        assert!(Grid::new(3, 8, 1.0).is_ok());
    }

    #[test]
    fn coordinates_and_spacing() {
        for (n, l) in [(8, 1.0), (32, std::f64::consts::TAU), (48, 4.0), (96, 8.0)] {
            let g = Grid::new(3, n, l).unwrap();
            assert_eq!(g.spacing() * n as f64, l);
            assert_eq!(g.coordinate(0), -0.5 * l);
            assert!((g.coordinate(n / 2)).abs() < 1e-15);
        }
    }

    #[test]
    fn flat_index_roundtrip() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        for flat in 0..g.len() {
            assert_eq!(g.flat_index(g.multi_index(flat)), flat);
        }
        let g2 = Grid::new(2, 10, 2.0).unwrap();
        assert_eq!(g2.len(), 100);
        assert_eq!(g2.point(11), [g2.coordinate(1), g2.coordinate(1), 0.0]);
    }

    #[test]
    fn time_grid_bounds() {
        assert!(TimeGrid::new(0.0, 0.1, 10).is_err());
        assert!(TimeGrid::new(0.1, 0.05, 10).is_err());
        assert!(TimeGrid::new(0.02, 0.6, 10).is_err());
        assert!(TimeGrid::exploratory(0.02, 1.5, 10).is_ok());
        let tg = TimeGrid::default_with_steps(64).unwrap();
        assert_eq!(tg.frames(), 65);
        assert_eq!(tg.time(0), 0.02);
        assert_eq!(tg.time(64), 0.1);
        assert!((tg.dt() - 0.08 / 64.0).abs() < 1e-18);
    }
}
