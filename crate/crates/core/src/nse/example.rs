//! The spatially constant flow `u = (h(t), 0, 0)` with pressure `p = -h'(t) x1`,
//! which solves the Navier-Stokes equations on the whole space and vanishes
//! identically at `t = T` without vanishing before.
//!
//! The pressure is not periodic, so this flow is checked pointwise from closed
//! forms rather than through the periodic solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `h(t) = (T - t)^3 ω(t)` for `t <= T` and `0` afterwards, where `ω` rises
/// smoothly from `0` at `t <= T/4` to `1` at `t >= T/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicProfile {
    pub t_final: f64,
}

fn psi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// `ω(s)` on the unit ramp and its derivative in `s`.
fn ramp(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0);
    }
    let (a, b) = (psi(s), psi(1.0 - s));
    let (da, db) = (a / (s * s), -b / ((1.0 - s) * (1.0 - s)));
    let den = a + b;
    (a / den, (da * b - a * db) / (den * den))
}

impl CubicProfile {
    pub fn new(t_final: f64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!("final time must be positive, got {t_final}")));
        }
        Ok(Self { t_final })
    }

    fn window(&self, t: f64) -> (f64, f64) {
        let q = 0.25 * self.t_final;
        let (w, dw) = ramp((t - q) / q);
        (w, dw / q)
    }

    pub fn h(&self, t: f64) -> f64 {
        if t >= self.t_final {
            return 0.0;
        }
        (self.t_final - t).powi(3) * self.window(t).0
    }

    pub fn h_prime(&self, t: f64) -> f64 {
        if t >= self.t_final {
            return 0.0;
        }
        let (w, dw) = self.window(t);
        let d = self.t_final - t;
        -3.0 * d * d * w + d.powi(3) * dw
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example13Config {
    pub profile: CubicProfile,
    pub samples: usize,
    /// Spatial samples are drawn from `[-extent, extent]^3`.
    pub extent: f64,
    /// Multiplies the pressure; `1` is the exact solution.
    pub pressure_scale: f64,
    pub seed: u64,
}

impl Example13Config {
    pub fn new(t_final: f64, samples: usize, seed: u64) -> Result<Self> {
        Ok(Self { profile: CubicProfile::new(t_final)?, samples, extent: 1.0, pressure_scale: 1.0, seed })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example13Report {
    pub samples: usize,
    /// Largest momentum or divergence residual over the samples.
    pub max_residual: f64,
    pub max_abs_h_prime: f64,
    /// `|u(T)|`, zero for the exact profile.
    pub final_speed: f64,
    /// Every sampled `t` in `[T/2, T)` has `u(t) != 0`, and `h` is nonzero somewhere before `T`.
    pub nonzero_before_final: bool,
    pub earliest_nonzero: f64,
}

/// Residual of `∂t u + (u·∇)u - Δu + ∇p` and of `∇·u` at seeded `(x, t)` samples.
///
/// Every term is evaluated from closed forms: `∂t u1 = h'`, the advection and
/// diffusion terms vanish because `u` is constant in space. The pressure
/// `p = -s h'(t) x1` is linear in `x`, so its centered difference at the
/// sample is its gradient up to rounding.
pub fn example_1_3_residual(config: &Example13Config) -> Result<Example13Report> {
    if config.samples == 0 {
        return Err(Error::InvalidParameter("no sample points requested".into()));
    }
    let prof = config.profile;
    let big_t = prof.t_final;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut max_residual: f64 = 0.0;
    let mut max_hp: f64 = 0.0;
    let mut nonzero = true;
    let half = 0.5 * big_t;
    for _ in 0..config.samples {
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-config.extent..=config.extent));
        let t = rng.random_range(0.0..big_t);
        let u = [prof.h(t), 0.0, 0.0];
        let hp = prof.h_prime(t);
        let p = |y: [f64; 3]| -config.pressure_scale * hp * y[0];
        let grad_p: [f64; 3] = std::array::from_fn(|i| {
            let (mut up, mut down) = (x, x);
            up[i] += 1.0;
            down[i] -= 1.0;
            0.5 * (p(up) - p(down))
        });
        let du_dt = [hp, 0.0, 0.0];
        let grad_u = [[0.0; 3]; 3];
        let lap_u = [0.0; 3];
        for i in 0..3 {
            let adv: f64 = (0..3).map(|j| u[j] * grad_u[j][i]).sum();
            max_residual = max_residual.max((du_dt[i] + adv - lap_u[i] + grad_p[i]).abs());
        }
        let div: f64 = (0..3).map(|j| grad_u[j][j]).sum();
        max_residual = max_residual.max(div.abs());
        max_hp = max_hp.max(hp.abs());
        if t >= half && u[0] == 0.0 {
            nonzero = false;
        }
    }
    // first time on a fine lattice where h is nonzero
    let earliest = (0..=10_000).map(|i| big_t * i as f64 / 10_000.0).find(|&t| prof.h(t) != 0.0).unwrap_or(big_t);
    Ok(Example13Report {
        samples: config.samples,
        max_residual,
        max_abs_h_prime: max_hp,
        final_speed: prof.h(big_t).abs(),
        nonzero_before_final: nonzero && earliest < big_t,
        earliest_nonzero: earliest,
    })
}
