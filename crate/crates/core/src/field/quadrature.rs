//! Rectangle rule in space, trapezoid rule in time.
//!
//! Sums are evaluated over fixed-size chunks in a fixed order so results are
//! bit-reproducible regardless of the thread count.

use rayon::prelude::*;

use super::fields::{ScalarField, SpaceTimeField, VectorField};
use super::grid::Point;
use crate::error::{Error, Result};

const CHUNK: usize = 4096;

/// Deterministic parallel sum of `f(i)` for `i in 0..len`.
pub fn ordered_sum(len: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(len);
            (c * CHUNK..end).map(&f).sum::<f64>()
        })
        .collect();
    partial.iter().sum()
}

/// `Σ w(x_i) f(x_i) dx^dim`.
pub fn spatial_integral(f: &ScalarField, w: impl Fn(Point) -> f64 + Sync) -> Result<f64> {
    let grid = *f.grid();
    let data = f.data();
    let s = ordered_sum(data.len(), |i| {
        let v = data[i];
        if v == 0.0 {
            0.0
        } else {
            w(grid.point(i)) * v
        }
    }) * grid.cell_volume();
    if s.is_nan() {
        return Err(Error::NonFinite("spatial integrand".into()));
    }
    Ok(s)
}

/// `Σ_m τ_m w_t(t_m) Σ_i w_x(x_i) f(x_i, t_m) dx^dim dt` with trapezoid weights `τ_m`.
pub fn weighted_integral(
    f: &SpaceTimeField,
    w_x: impl Fn(Point) -> f64 + Sync,
    w_t: impl Fn(f64) -> f64,
) -> Result<f64> {
    let tg = *f.time_grid();
    let per_frame = frame_integrals(f, &w_x)?;
    let mut total = 0.0;
    for (m, s) in per_frame.iter().enumerate() {
        if *s != 0.0 {
            total += tg.trapezoid_weight(m) * w_t(tg.time(m)) * s;
        }
    }
    total *= tg.dt();
    if total.is_nan() {
        return Err(Error::NonFinite("weighted integrand".into()));
    }
    Ok(total)
}

/// Same as [`weighted_integral`] with the temporal weight given by its logarithm.
pub fn weighted_integral_log(
    f: &SpaceTimeField,
    w_x: impl Fn(Point) -> f64 + Sync,
    ln_w_t: impl Fn(f64) -> f64,
) -> Result<LogReal> {
    let tg = *f.time_grid();
    let per_frame = frame_integrals(f, &w_x)?;
    let terms: Vec<LogReal> = per_frame
        .iter()
        .enumerate()
        .map(|(m, s)| LogReal::from_f64(tg.trapezoid_weight(m) * tg.dt() * s).mul_exp(ln_w_t(tg.time(m))))
        .collect();
    let total = LogReal::sum(&terms);
    if total.ln_abs.is_nan() {
        return Err(Error::NonFinite("weighted integrand".into()));
    }
    Ok(total)
}

/// Spatial integrals of every frame, in frame order.
pub fn frame_integrals(f: &SpaceTimeField, w_x: &(impl Fn(Point) -> f64 + Sync)) -> Result<Vec<f64>> {
    f.frames().iter().map(|fr| spatial_integral(fr, w_x)).collect()
}

/// Discrete L² pairing with the lattice measure.
pub trait InnerProduct {
    fn inner(&self, other: &Self) -> Result<f64>;

    fn norm_squared(&self) -> f64
    where
        Self: Sized,
    {
        self.inner(self).unwrap_or(f64::NAN)
    }
}

impl InnerProduct for ScalarField {
    fn inner(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        let (a, b) = (self.data(), other.data());
        Ok(ordered_sum(a.len(), |i| a[i] * b[i]) * self.grid().cell_volume())
    }
}

impl InnerProduct for VectorField {
    fn inner(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch("vector fields of different dimension".into()));
        }
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| a.inner(b))
            .sum()
    }
}

/// Uniform `dt` in time: frames outside the support contribute nothing, and the
/// zero-extended centered difference is exactly skew for this pairing.
impl InnerProduct for SpaceTimeField {
    fn inner(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        let mut s = 0.0;
        for (a, b) in self.frames().iter().zip(other.frames()) {
            s += a.inner(b)?;
        }
        Ok(s * self.time_grid().dt())
    }
}

pub fn inner_product<T: InnerProduct>(f: &T, g: &T) -> Result<f64> {
    f.inner(g)
}

/// A real number stored as `sign * exp(ln_abs)`, for weights like `h(t)^{-2a}` at large `a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogReal {
    pub ln_abs: f64,
    pub sign: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal { ln_abs: f64::NEG_INFINITY, sign: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self { ln_abs: x.abs().ln(), sign: x.signum() }
        }
    }

    pub fn from_ln(ln_abs: f64) -> Self {
        Self { ln_abs, sign: 1.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }

    /// Multiplies by `exp(ln_factor)`.
    pub fn mul_exp(self, ln_factor: f64) -> Self {
        if self.is_zero() {
            self
        } else {
            Self { ln_abs: self.ln_abs + ln_factor, sign: self.sign }
        }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            Self::ZERO
        } else {
            Self { ln_abs: self.ln_abs + other.ln_abs, sign: self.sign * other.sign }
        }
    }

    /// `self / other`; dividing by zero yields `+inf` magnitude.
    pub fn div(self, other: Self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        if other.is_zero() {
            return Self { ln_abs: f64::INFINITY, sign: self.sign };
        }
        Self { ln_abs: self.ln_abs - other.ln_abs, sign: self.sign * other.sign }
    }

    /// Log-sum-exp in slice order.
    pub fn sum(terms: &[LogReal]) -> Self {
        let max = terms
            .iter()
            .filter(|t| !t.is_zero())
            .map(|t| t.ln_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        if max.is_infinite() || max.is_nan() {
            return Self { ln_abs: max, sign: 1.0 };
        }
        let s: f64 = terms
            .iter()
            .filter(|t| !t.is_zero())
            .map(|t| t.sign * (t.ln_abs - max).exp())
            .sum();
        Self::from_f64(s).mul_exp(max)
    }

    /// Converts back to `f64`; may overflow to `±inf`.
    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::bump::{bump_profile, make_bump, BumpSpec};
    use crate::field::grid::{Grid, TimeGrid};

    fn smooth(grid: Grid, phase: f64) -> ScalarField {
        let tau = std::f64::consts::TAU / grid.length();
        ScalarField::from_fn(grid, |x| (tau * x[0] + phase).sin() + 0.3 * (2.0 * tau * x[1]).cos()).unwrap()
    }

    #[test]
    fn zero_field_integrates_to_zero() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let tg = TimeGrid::default_with_steps(8).unwrap();
        let f = SpaceTimeField::zeros(g, tg);
        assert_eq!(weighted_integral(&f, |_| 1.0, |_| 1.0).unwrap(), 0.0);
    }

    /// `2 pi ∫_0^1 s e^{-2/(1-s^2)} ds`, the integral of a squared unit 2-D bump.
    fn radial_oracle() -> f64 {
        let n = 1_000_000;
        let ds = 1.0 / n as f64;
        let s: f64 = (0..n)
            .map(|i| {
                let s = (i as f64 + 0.5) * ds;
                s * bump_profile(s * s).powi(2)
            })
            .sum();
        std::f64::consts::TAU * s * ds
    }

    #[test]
    fn squared_bump_matches_radial_oracle() {
        let g = Grid::new(2, 128, 4.0).unwrap();
        let b = make_bump(&BumpSpec::spatial([0.0; 3], 1.5, 1.0), &g).unwrap();
        let sq = b.pointwise_mul(&b).unwrap();
        let got = spatial_integral(&sq, |_| 1.0).unwrap();
        let exact = radial_oracle() * 1.5 * 1.5;
        assert!(((got - exact) / exact).abs() < 1e-3, "{got} vs {exact}");
    }

    #[test]
    fn linear_in_integrand() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let f = smooth(g, 0.2);
        let sq = f.pointwise_mul(&f).unwrap();
        let w = |x: Point| 1.0 / (1.0 + x[0] * x[0]);
        let base = spatial_integral(&sq, w).unwrap();
        for c in [0.5, 2.0, 3.0] {
            let scaled = spatial_integral(&sq.scaled(c), w).unwrap();
            assert!((scaled - c * base).abs() <= 1e-14 * scaled.abs());
        }
    }

    #[test]
    fn nan_integrand_is_an_error() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let f = ScalarField::constant(g, 1.0);
        assert!(spatial_integral(&f, |_| f64::NAN).is_err());
    }

    #[test]
    fn trapezoid_in_time() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let tg = TimeGrid::new(0.1, 0.5, 4).unwrap();
        let f = SpaceTimeField::from_frames(g, tg, |_, _| Ok(ScalarField::constant(g, 1.0))).unwrap();
        // ∫_{0.1}^{0.5} t dt over the unit box, exact for the trapezoid rule
        let got = weighted_integral(&f, |_| 1.0, |t| t).unwrap();
        assert!((got - 0.12).abs() < 1e-15);
    }

    #[test]
    fn log_domain_matches_direct_when_representable() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let tg = TimeGrid::default_with_steps(16).unwrap();
        let f = SpaceTimeField::from_frames(g, tg, |m, _| Ok(smooth(g, m as f64).map(|v| v * v)?)).unwrap();
        let direct = weighted_integral(&f, |_| 1.0, |t| t.powf(-30.0)).unwrap();
        let logd = weighted_integral_log(&f, |_| 1.0, |t| -30.0 * t.ln()).unwrap();
        assert!(((logd.to_f64() - direct) / direct).abs() < 1e-12);
    }

    #[test]
    fn log_domain_survives_overflow() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let tg = TimeGrid::default_with_steps(8).unwrap();
        let f = SpaceTimeField::from_frames(g, tg, |_, _| Ok(ScalarField::constant(g, 1.0))).unwrap();
        let v = weighted_integral_log(&f, |_| 1.0, |t| -20001.0 * t.ln()).unwrap();
        assert!(v.ln_abs.is_finite() && v.ln_abs > 700.0);
        assert!(v.to_f64().is_infinite());
    }

    #[test]
    fn logreal_arithmetic() {
        let a = LogReal::from_f64(3.0);
        let b = LogReal::from_f64(-1.0);
        assert!((LogReal::sum(&[a, b]).to_f64() - 2.0).abs() < 1e-15);
        assert!((a.mul(b).to_f64() + 3.0).abs() < 1e-14);
        assert!((a.div(LogReal::from_f64(2.0)).to_f64() - 1.5).abs() < 1e-15);
        assert!(LogReal::sum(&[LogReal::ZERO]).is_zero());
    }

    #[test]
    fn pairing_is_symmetric_and_positive() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        let f = smooth(g, 0.1);
        let h = smooth(g, 1.3);
        assert_eq!(f.inner(&h).unwrap(), h.inner(&f).unwrap());
        assert!(f.norm_squared() > 0.0);
        assert_eq!(ScalarField::zeros(g).norm_squared(), 0.0);
        let g2 = Grid::new(3, 10, 2.0).unwrap();
        assert!(f.inner(&ScalarField::zeros(g2)).is_err());
    }
}
