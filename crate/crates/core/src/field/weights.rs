//! Temporal weight `h(t) = t e^{-t}` and polynomial spatial weights `(1 + |x|^2)^{-k}`.

use serde::{Deserialize, Serialize};

use super::grid::Point;
use crate::error::{Error, Result};

/// Upper limit (exclusive) on `k` for the weighted Calderón–Zygmund bound.
pub const CZ_K_LIMIT: f64 = 2.5;

/// `h(t) = t e^{-t}`, defined for `t > 0`.
pub fn temporal_weight(t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(t * (-t).exp())
}

/// `h'(t) = (1 - t) e^{-t}`.
pub fn temporal_weight_derivative(t: f64) -> Result<f64> {
    check_time(t)?;
    Ok((1.0 - t) * (-t).exp())
}

/// `ln h(t) = ln t - t`, finite for every `t > 0`.
pub fn log_temporal_weight(t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(t.ln() - t)
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("temporal weight needs t > 0, got {t}")))
    }
}

pub fn norm_squared(x: Point) -> f64 {
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
}

/// `(1 + |x|^2)^{-k}`
pub fn spatial_weight(x: Point, k: f64) -> f64 {
    (1.0 + norm_squared(x)).powf(-k)
}

/// Which power of `(1 + |x|^2)` the spatial weight carries.
///
/// The estimate is stated with `(1+|x|^2)^{-k}`, while the conjugation
/// argument produces `(1+|x|^2)^{-2k}`; both are available.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialExponent {
    #[default]
    SingleK,
    DoubleK,
}

impl SpatialExponent {
    pub fn label(&self) -> &'static str {
        match self {
            SpatialExponent::SingleK => "single_k",
            SpatialExponent::DoubleK => "double_k",
        }
    }
}

/// Carleman parameter `a`, decay exponent `k`, and the exponent convention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub a: f64,
    pub k: f64,
    pub convention: SpatialExponent,
}

impl WeightParams {
    pub fn new(a: f64, k: f64, convention: SpatialExponent) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::InvalidParameter(format!("a must be >= 0, got {a}")));
        }
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::InvalidParameter(format!("k must be >= 0, got {k}")));
        }
        Ok(Self { a, k, convention })
    }

    /// Exponent `e` in `(1 + |x|^2)^{-e}` under the chosen convention.
    pub fn spatial_exponent(&self) -> f64 {
        match self.convention {
            SpatialExponent::SingleK => self.k,
            SpatialExponent::DoubleK => 2.0 * self.k,
        }
    }

    pub fn spatial(&self, x: Point) -> f64 {
        spatial_weight(x, self.spatial_exponent())
    }

    pub fn with_a(&self, a: f64) -> Self {
        Self { a, ..*self }
    }

    /// Rejects `k >= 5/2`, where the weighted Calderón–Zygmund bound is not claimed.
    pub fn check_cz_range(k: f64) -> Result<()> {
        if !(0.0..CZ_K_LIMIT).contains(&k) {
            return Err(Error::Hypothesis(format!(
                "the weighted Calderón–Zygmund bound requires 0 <= k < 5/2, got k = {k}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::grid::TimeGrid;

    #[test]
    fn temporal_weight_values() {
        assert!((temporal_weight(1.0).unwrap() - 0.36787944117144233).abs() < 1e-15);
        assert!(temporal_weight(0.0).is_err());
        assert!(temporal_weight(-1.0).is_err());
        // t -> 0+: h -> 0 and 1/h blows up
        let tiny = temporal_weight(1e-12).unwrap();
        assert!(tiny < 1e-11 && 1.0 / tiny > 1e11);
        // t h'(t) / h(t) = 1 - t
        let t = 0.3;
        let r = temporal_weight_derivative(t).unwrap() / temporal_weight(t).unwrap() * t;
        assert!((r - 0.7).abs() < 1e-14);
        assert!((log_temporal_weight(0.5).unwrap() - temporal_weight(0.5).unwrap().ln()).abs() < 1e-15);
    }

    #[test]
    fn temporal_weight_bounded_by_t_on_lattice() {
        let tg = TimeGrid::new(0.001, 0.5, 500).unwrap();
        for t in tg.times() {
            let h = temporal_weight(t).unwrap();
            assert!(h > 0.0 && h <= t);
        }
    }

    #[test]
    fn spatial_weight_values() {
        assert_eq!(spatial_weight([0.0; 3], 3.7), 1.0);
        assert_eq!(spatial_weight([5.0, -2.0, 1.0], 0.0), 1.0);
        assert_eq!(spatial_weight([1.0, 1.0, 1.0], 2.0), 1.0 / 16.0);
        let p = WeightParams::new(1.0, 2.0, SpatialExponent::DoubleK).unwrap();
        assert_eq!(p.spatial([1.0, 1.0, 1.0]), 1.0 / 256.0);
    }

    #[test]
    fn parameter_validation() {
        assert!(WeightParams::new(-1.0, 1.0, SpatialExponent::SingleK).is_err());
        assert!(WeightParams::new(1.0, -0.5, SpatialExponent::SingleK).is_err());
        assert!(WeightParams::check_cz_range(2.4).is_ok());
        assert!(matches!(WeightParams::check_cz_range(2.5), Err(Error::Hypothesis(_))));
    }
}
