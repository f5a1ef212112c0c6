//! Fixed-point iteration of the mild formulation on a fixed time lattice.

use serde::{Deserialize, Serialize};

use super::solver::{MildSolverConfig, MildStepper};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::spectral::Spectrum;

#[derive(Clone, Debug, PartialEq)]
pub struct PicardReport {
    /// Last iterate at the horizon.
    pub at_horizon: VectorField,
    /// `sup_t ‖u^{n+1}(t) - u^n(t)‖₂` for each iteration.
    pub distances: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contraction {
    /// Geometric mean of successive distance ratios.
    pub factor: f64,
    pub last_distance: f64,
}

impl PicardReport {
    /// `None` when fewer than two nonzero distances exist.
    pub fn contraction(&self) -> Option<Contraction> {
        let ratios: Vec<f64> = self
            .distances
            .windows(2)
            .filter(|w| w[0] > 0.0 && w[1] > 0.0)
            .map(|w| w[1] / w[0])
            .collect();
        if ratios.is_empty() {
            return None;
        }
        let factor = (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp();
        Some(Contraction { factor, last_distance: *self.distances.last().expect("non-empty") })
    }
}

fn distance(a: &[Spectrum], b: &[Spectrum]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let mut d = x.clone();
            d.axpy(-1.0, y);
            d.pairing(&d)
        })
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

fn norm(a: &[Spectrum]) -> f64 {
    a.iter().map(|x| x.pairing(x)).sum::<f64>().max(0.0).sqrt()
}

/// Iterates `u^{n+1}(t) = e^{tΔ}u0 + ∫_0^t e^{(t-τ)Δ} P[-∇·(u^n⊗u^n) + f] dτ`
/// starting from `u^0 ≡ u0`, with trapezoid quadrature on the lattice `j·dt`.
///
/// The Duhamel integral is accumulated recursively,
/// `I_j = E(dt) I_{j-1} + dt/2 (E(dt) N_{j-1} + N_j)`,
/// which equals the trapezoid rule over all previous nodes.
pub fn picard_iterate(u0: &VectorField, horizon: f64, iterations: usize, config: &MildSolverConfig) -> Result<PicardReport> {
    let mut c = config.clone();
    c.total_time = horizon;
    let nodes = c.steps()?;
    if iterations == 0 {
        return Err(Error::InvalidParameter("at least one Picard iteration is needed".into()));
    }
    let stepper = MildStepper::new(*u0.grid(), &c)?;
    let s0 = stepper.to_state(u0)?;
    let n0 = norm(&s0);
    let zero_state = || s0.iter().map(|s| Spectrum::zeros(*s.grid())).collect::<Vec<_>>();

    // free evolution e^{t_j Δ} u0 at every node
    let mut free = vec![s0.clone()];
    for _ in 0..nodes {
        let prev = free.last().expect("non-empty");
        free.push(stepper.linear_step(prev));
    }
    let mut current: Vec<Vec<Spectrum>> = vec![s0.clone(); nodes + 1];
    let mut distances = Vec::with_capacity(iterations);
    for it in 0..iterations {
        let n: Vec<Vec<Spectrum>> = current.iter().map(|s| stepper.nonlinear(s)).collect();
        let mut next = Vec::with_capacity(nodes + 1);
        let mut integral = zero_state();
        next.push(free[0].clone());
        for j in 1..=nodes {
            let decayed = stepper.linear_step(&integral);
            let decayed_n = stepper.linear_step(&n[j - 1]);
            integral = decayed;
            for (acc, (a, b)) in integral.iter_mut().zip(decayed_n.iter().zip(&n[j])) {
                acc.axpy(0.5 * c.dt, a);
                acc.axpy(0.5 * c.dt, b);
            }
            let mut u = free[j].clone();
            for (x, y) in u.iter_mut().zip(&integral) {
                x.axpy(1.0, y);
            }
            next.push(u);
        }
        let d = current.iter().zip(&next).map(|(a, b)| distance(a, b)).fold(0.0, f64::max);
        let size = next.iter().map(|s| norm(s)).fold(0.0, f64::max);
        if !d.is_finite() || size > 1e3 * n0.max(f64::MIN_POSITIVE) {
            return Err(Error::Diverged(format!(
                "Picard iterates grew to {size:e} after {} iterations; try a smaller horizon",
                it + 1
            )));
        }
        let growing = distances.len() >= 2 && {
            let k = distances.len();
            d > distances[k - 1] && distances[k - 1] > distances[k - 2]
        };
        distances.push(d);
        current = next;
        if growing {
            return Err(Error::Diverged(format!(
                "successive Picard distances grew for three iterations ({distances:?}); try a smaller horizon"
            )));
        }
    }
    Ok(PicardReport { at_horizon: stepper.to_field(&current[nodes]), distances })
}
