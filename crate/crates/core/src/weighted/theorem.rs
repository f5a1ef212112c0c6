//! Both sides of the weighted space-time estimate for the heat operator.
//!
//! lhs(a) = ∫ h^{-(2a+1)} w ((a+1)u^2 + |∇u|^2),  rhs(a) = ∫ h^{-2a} w |∂t u + Δu|^2
//!
//! The spatial integrals of each frame do not depend on `a`, so they are
//! computed once and reused for every point of an `a`-sweep.

use crate::commutator::transform::{LOG_DOMAIN_A, LOG_OVERFLOW_GUARD};
use crate::error::{Error, Result};
use crate::field::quadrature::{ordered_sum, LogReal};
use crate::field::weights::log_temporal_weight;
use crate::field::{Grid, ScalarField, SpaceTimeField, TimeGrid, WeightParams};
use crate::spectral::{gradient, laplacian};

/// Per-frame spatial integrals `∫ w u^2`, `∫ w |∇u|^2`, `∫ w |∂t u + Δu|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremIntegrals {
    time_grid: TimeGrid,
    u2: Vec<f64>,
    grad2: Vec<f64>,
    heat2: Vec<f64>,
}

fn weight_samples(grid: &Grid, weight: &WeightParams) -> Vec<f64> {
    grid.points().map(|x| weight.spatial(x)).collect()
}

fn weighted_sum(w: &[f64], grid: &Grid, f: impl Fn(usize) -> f64 + Sync) -> Result<f64> {
    let s = ordered_sum(w.len(), |i| w[i] * f(i)) * grid.cell_volume();
    if !s.is_finite() {
        return Err(Error::NonFinite("weighted spatial integral".into()));
    }
    Ok(s)
}

impl TheoremIntegrals {
    pub fn from_field(u: &SpaceTimeField, weight: &WeightParams) -> Result<Self> {
        Self::from_frames(*u.grid(), *u.time_grid(), weight, |m| Ok(u.frame(m).clone()))
    }

    /// Frames are requested in order and at most three are held at once.
    pub fn from_frames(
        grid: Grid,
        time_grid: TimeGrid,
        weight: &WeightParams,
        frame: impl Fn(usize) -> Result<ScalarField>,
    ) -> Result<Self> {
        let w = weight_samples(&grid, weight);
        let last = time_grid.steps();
        let inv = 0.5 / time_grid.dt();
        let fetch = |m: usize| -> Result<Option<ScalarField>> {
            if m > last {
                return Ok(None);
            }
            let f = frame(m)?;
            if *f.grid() != grid {
                return Err(Error::ShapeMismatch("frame grid differs from the declared grid".into()));
            }
            Ok(Some(f))
        };
        let mut window = [None, fetch(0)?, fetch(1)?];
        let frames = time_grid.frames();
        let (mut u2, mut grad2, mut heat2) = (Vec::with_capacity(frames), Vec::with_capacity(frames), Vec::with_capacity(frames));
        for m in 0..=last {
            let cur = window[1].as_ref().expect("frame m exists");
            let c = cur.data();
            u2.push(weighted_sum(&w, &grid, |i| c[i] * c[i])?);
            let g = gradient(cur);
            grad2.push(weighted_sum(&w, &grid, |i| g.components().iter().map(|gc| gc.data()[i].powi(2)).sum())?);
            let lap = laplacian(cur);
            let (prev, next) = (window[0].as_ref().map(|f| f.data()), window[2].as_ref().map(|f| f.data()));
            let l = lap.data();
            heat2.push(weighted_sum(&w, &grid, |i| {
                let ut = inv * (next.map_or(0.0, |n| n[i]) - prev.map_or(0.0, |p| p[i]));
                (ut + l[i]).powi(2)
            })?);
            let incoming = fetch(m + 2)?;
            window = [window[1].take(), window[2].take(), incoming];
        }
        Ok(Self { time_grid, u2, grad2, heat2 })
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time_grid
    }

    fn ln_h(&self) -> Vec<f64> {
        self.time_grid.times().map(|t| log_temporal_weight(t).expect("T- > 0")).collect()
    }

    /// Log-domain accumulation is used from [`LOG_DOMAIN_A`] on, and earlier
    /// whenever `h^{-(2a+1)}` would leave the comfortable floating-point range.
    pub fn uses_log_domain(&self, a: f64) -> bool {
        let worst = self.ln_h().iter().map(|l| -l).fold(0.0, f64::max);
        a >= LOG_DOMAIN_A || (2.0 * a + 1.0) * worst > LOG_OVERFLOW_GUARD
    }

    /// Trapezoid sum of `h^{-p} g_m`.
    fn accumulate(&self, power: f64, log_domain: bool, g: impl Fn(usize) -> f64) -> LogReal {
        let tg = &self.time_grid;
        let ln_h = self.ln_h();
        if log_domain {
            let terms: Vec<LogReal> = (0..tg.frames())
                .map(|m| LogReal::from_f64(tg.trapezoid_weight(m) * tg.dt() * g(m)).mul_exp(-power * ln_h[m]))
                .collect();
            LogReal::sum(&terms)
        } else {
            let s: f64 = (0..tg.frames())
                .map(|m| tg.trapezoid_weight(m) * (-power * ln_h[m]).exp() * g(m))
                .sum();
            LogReal::from_f64(s * tg.dt())
        }
    }

    pub fn lhs(&self, a: f64) -> LogReal {
        self.accumulate(2.0 * a + 1.0, self.uses_log_domain(a), |m| (a + 1.0) * self.u2[m] + self.grad2[m])
    }

    pub fn rhs(&self, a: f64) -> LogReal {
        self.accumulate(2.0 * a, self.uses_log_domain(a), |m| self.heat2[m])
    }

    /// Both sides evaluated in the log domain regardless of `a`.
    pub fn lhs_rhs_log(&self, a: f64) -> (LogReal, LogReal) {
        (
            self.accumulate(2.0 * a + 1.0, true, |m| (a + 1.0) * self.u2[m] + self.grad2[m]),
            self.accumulate(2.0 * a, true, |m| self.heat2[m]),
        )
    }
}

pub fn theorem_lhs(u: &SpaceTimeField, params: &WeightParams) -> Result<LogReal> {
    Ok(TheoremIntegrals::from_field(u, params)?.lhs(params.a))
}

pub fn theorem_rhs(u: &SpaceTimeField, params: &WeightParams) -> Result<LogReal> {
    Ok(TheoremIntegrals::from_field(u, params)?.rhs(params.a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_spacetime_bump, BumpSpec, SpatialExponent, TemporalSupport};

    fn setup() -> (SpaceTimeField, WeightParams) {
        let g = Grid::new(2, 24, 6.0).unwrap();
        let tg = TimeGrid::default_with_steps(32).unwrap();
        let spec = BumpSpec::spatial([0.3, 0.0, 0.0], 1.5, 1.0).with_temporal(TemporalSupport {
            center: 0.06,
            halfwidth: 0.035,
            amplitude: 1.0,
        });
        let u = make_spacetime_bump(&spec, &g, &tg).unwrap();
        (u, WeightParams::new(10.0, 2.0, SpatialExponent::SingleK).unwrap())
    }

    #[test]
    fn zero_field_gives_zero() {
        let (u, p) = setup();
        let z = SpaceTimeField::zeros(*u.grid(), *u.time_grid());
        assert!(theorem_lhs(&z, &p).unwrap().is_zero());
        assert!(theorem_rhs(&z, &p).unwrap().is_zero());
    }

    #[test]
    fn quadratic_homogeneity() {
        let (u, p) = setup();
        let one = TheoremIntegrals::from_field(&u, &p).unwrap();
        let two = TheoremIntegrals::from_field(&u.scaled(2.0), &p).unwrap();
        for a in [10.0, 1e3] {
            assert!((two.lhs(a).ln_abs - one.lhs(a).ln_abs - 4f64.ln()).abs() < 1e-12);
            assert!((two.rhs(a).ln_abs - one.rhs(a).ln_abs - 4f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn float_and_log_paths_agree() {
        let (u, p) = setup();
        let ints = TheoremIntegrals::from_field(&u, &p).unwrap();
        assert!(!ints.uses_log_domain(10.0) && ints.uses_log_domain(200.0));
        let (l, r) = ints.lhs_rhs_log(30.0);
        assert!((ints.lhs(30.0).ln_abs - l.ln_abs).abs() < 1e-12);
        assert!((ints.rhs(30.0).ln_abs - r.ln_abs).abs() < 1e-12);
        assert!(ints.lhs(1e4).ln_abs.is_finite());
    }
}
