//! Compactly supported smooth test functions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fields::{ScalarField, SpaceTimeField};
use super::grid::{Grid, Point, TimeGrid};
use crate::error::{Error, Result};

/// Standard bump profile `exp(-1/(1-s^2))` on `|s| < 1`, zero elsewhere.
pub fn bump_profile(s_squared: f64) -> f64 {
    if s_squared < 1.0 {
        (-1.0 / (1.0 - s_squared)).exp()
    } else {
        0.0
    }
}

/// Temporal factor of a space-time bump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemporalSupport {
    pub center: f64,
    pub halfwidth: f64,
    pub amplitude: f64,
}

impl TemporalSupport {
    pub fn value(&self, t: f64) -> f64 {
        let s = (t - self.center) / self.halfwidth;
        self.amplitude * bump_profile(s * s)
    }

    pub fn fits_inside(&self, time_grid: &TimeGrid) -> bool {
        self.center - self.halfwidth > time_grid.t_minus()
            && self.center + self.halfwidth < time_grid.t_plus()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub center: Point,
    pub radius: f64,
    pub amplitude: f64,
    pub temporal: Option<TemporalSupport>,
}

impl BumpSpec {
    pub fn spatial(center: Point, radius: f64, amplitude: f64) -> Self {
        Self { center, radius, amplitude, temporal: None }
    }

    pub fn with_temporal(mut self, temporal: TemporalSupport) -> Self {
        self.temporal = Some(temporal);
        self
    }

    /// Spatial value `amplitude * exp(-1/(1 - |x-c|^2/r^2))`.
    pub fn value(&self, x: Point) -> f64 {
        let d2: f64 = (0..3).map(|i| (x[i] - self.center[i]).powi(2)).sum();
        self.amplitude * bump_profile(d2 / (self.radius * self.radius))
    }

    fn check_spatial(&self, grid: &Grid) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("bump radius must be positive, got {}", self.radius)));
        }
        if !grid.contains_ball(self.center, self.radius) {
            return Err(Error::Support(format!(
                "ball of radius {} around {:?} touches the boundary of the box of side {}",
                self.radius,
                &self.center[..grid.dim()],
                grid.length()
            )));
        }
        Ok(())
    }
}

/// Samples a spatial bump; the ball must lie strictly inside the periodic box.
pub fn make_bump(spec: &BumpSpec, grid: &Grid) -> Result<ScalarField> {
    spec.check_spatial(grid)?;
    ScalarField::from_fn(*grid, |x| spec.value(x))
}

/// Product of a spatial bump and its temporal bump.
pub fn make_spacetime_bump(spec: &BumpSpec, grid: &Grid, time_grid: &TimeGrid) -> Result<SpaceTimeField> {
    make_superposition(std::slice::from_ref(spec), grid, time_grid)
}

/// Sum of space-time bumps; each one is checked for support.
pub fn make_superposition(specs: &[BumpSpec], grid: &Grid, time_grid: &TimeGrid) -> Result<SpaceTimeField> {
    let mut spatial = Vec::with_capacity(specs.len());
    for spec in specs {
        let temporal = spec
            .temporal
            .ok_or_else(|| Error::InvalidParameter("space-time bump needs a temporal support".into()))?;
        if !temporal.fits_inside(time_grid) {
            return Err(Error::Support(format!(
                "temporal support [{}, {}] not strictly inside ({}, {})",
                temporal.center - temporal.halfwidth,
                temporal.center + temporal.halfwidth,
                time_grid.t_minus(),
                time_grid.t_plus()
            )));
        }
        spatial.push((make_bump(spec, grid)?, temporal));
    }
    SpaceTimeField::from_frames(*grid, *time_grid, |_, t| {
        let mut frame = ScalarField::zeros(*grid);
        for (b, temporal) in &spatial {
            let c = temporal.value(t);
            if c != 0.0 {
                frame.axpy(c, b)?;
            }
        }
        Ok(frame)
    })
}

/// Smooth step: 1 for `s <= 0`, 0 for `s >= 1`, infinitely differentiable.
pub fn smooth_step(s: f64) -> f64 {
    let psi = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let (a, b) = (psi(1.0 - s), psi(s));
    a / (a + b)
}

/// Radial plateau: 1 on `r <= radius`, 0 on `r >= radius + width`.
pub fn plateau(r: f64, radius: f64, width: f64) -> f64 {
    smooth_step((r - radius) / width)
}

/// Centered plateau field; the transition layer must end strictly inside the box.
pub fn make_plateau(radius: f64, width: f64, grid: &Grid) -> Result<ScalarField> {
    if !(radius >= 0.0 && width > 0.0) {
        return Err(Error::InvalidParameter(format!("plateau needs radius >= 0 and width > 0, got {radius}, {width}")));
    }
    if !grid.contains_ball([0.0; 3], radius + width) {
        return Err(Error::Support(format!(
            "plateau of outer radius {} does not fit in a box of side {}",
            radius + width,
            grid.length()
        )));
    }
    ScalarField::from_fn(*grid, |x| plateau(super::weights::norm_squared(x).sqrt(), radius, width))
}

/// Ranges for randomized bump superpositions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSampler {
    /// Bumps per superposition, drawn uniformly from `1..=max_bumps`.
    pub max_bumps: usize,
    pub radius: (f64, f64),
    pub amplitude: (f64, f64),
    /// Temporal halfwidth as a fraction of `T+ - T-`, before fitting.
    pub halfwidth_fraction: (f64, f64),
    /// Gap between the ball and the box boundary.
    pub margin: f64,
}

impl Default for BumpSampler {
    fn default() -> Self {
        Self {
            max_bumps: 3,
            radius: (1.3, 1.6),
            amplitude: (0.5, 1.5),
            halfwidth_fraction: (0.4625, 0.49),
            margin: 0.1,
        }
    }
}

impl BumpSampler {
    /// Draws one superposition that fits the box and time window.
    pub fn sample(&self, rng: &mut impl Rng, grid: &Grid, time_grid: &TimeGrid) -> Result<Vec<BumpSpec>> {
        let half = 0.5 * grid.length();
        let count = rng.random_range(1..=self.max_bumps.max(1));
        let window = time_grid.t_plus() - time_grid.t_minus();
        let mut specs = Vec::with_capacity(count);
        for _ in 0..count {
            let radius = rng.random_range(self.radius.0..=self.radius.1);
            let reach = half - radius - self.margin;
            if reach <= 0.0 {
                return Err(Error::Support(format!(
                    "radius {radius} does not fit in a box of half-width {half}"
                )));
            }
            let mut center = [0.0; 3];
            for c in center.iter_mut().take(grid.dim()) {
                *c = rng.random_range(-reach..reach);
            }
            let amplitude = rng.random_range(self.amplitude.0..=self.amplitude.1);
            let hw = window * rng.random_range(self.halfwidth_fraction.0..=self.halfwidth_fraction.1);
            let slack = 0.5 * window - hw;
            if slack <= 0.0 {
                return Err(Error::Support("temporal halfwidth exceeds the window".into()));
            }
            let mid = 0.5 * (time_grid.t_minus() + time_grid.t_plus());
            let tc = mid + 0.9 * slack * rng.random_range(-1.0..1.0);
            specs.push(
                BumpSpec::spatial(center, radius, amplitude).with_temporal(TemporalSupport {
                    center: tc,
                    halfwidth: hw,
                    amplitude: 1.0,
                }),
            );
        }
        Ok(specs)
    }
}
