//! Time marching with per-step diagnostics.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::axisym::{swirl_fraction, symmetry_defect};
use super::solver::{cfl_limit, MildSolverConfig, MildStepper};
use crate::error::{Error, Result};
use crate::field::quadrature::ordered_sum;
use crate::field::{Grid, VectorField};
use crate::spectral::{Spectrum, Wavevectors};

/// Which of the optional diagnostics to evaluate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticOptions {
    /// Swirl fraction (3D only).
    pub swirl: bool,
    /// Rotation angles for the symmetry defect; empty skips it.
    pub symmetry_angles: Vec<f64>,
}

impl DiagnosticOptions {
    pub fn axisymmetric(angles: &[f64]) -> Self {
        Self { swirl: true, symmetry_angles: angles.to_vec() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub step: usize,
    pub t: f64,
    /// `½‖u‖²`.
    pub energy: f64,
    /// `½‖∇u‖²`.
    pub enstrophy: f64,
    /// `‖∇·u‖₂`.
    pub div_norm: f64,
    pub swirl_fraction: Option<f64>,
    pub symmetry_defect: Option<f64>,
    /// Share of the energy with `max_i |x_i| > 3L/8`.
    pub boundary_energy_fraction: f64,
}

impl Diagnostics {
    pub const CSV_HEADER: [&'static str; 8] = [
        "step",
        "t",
        "energy",
        "enstrophy",
        "div_norm",
        "swirl_fraction",
        "symmetry_defect",
        "boundary_energy_fraction",
    ];

    /// Fields in [`Self::CSV_HEADER`] order; absent diagnostics are empty.
    pub fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        vec![
            self.step.to_string(),
            format!("{:e}", self.t),
            format!("{:e}", self.energy),
            format!("{:e}", self.enstrophy),
            format!("{:e}", self.div_norm),
            opt(self.swirl_fraction),
            opt(self.symmetry_defect),
            format!("{:e}", self.boundary_energy_fraction),
        ]
    }
}

fn spectral_norm_squared(s: &Spectrum, symbol: impl Fn(usize) -> f64 + Sync) -> f64 {
    let mut t = s.clone();
    t.map_modes(|i, c| c * symbol(i));
    t.pairing(&t)
}

/// Evaluates all diagnostics for one state.
pub fn diagnose(step: usize, t: f64, state: &[Spectrum], u: &VectorField, options: &DiagnosticOptions) -> Result<Diagnostics> {
    let grid = *u.grid();
    let wv = Wavevectors::new(&grid);
    let mag = u.magnitude_squared();
    let energy = 0.5 * ordered_sum(grid.len(), |i| mag.data()[i]) * grid.cell_volume();
    let enstrophy = 0.5 * state.iter().map(|s| spectral_norm_squared(s, |i| wv.xi_squared(i).sqrt())).sum::<f64>();
    let mut div = Spectrum::zeros(grid);
    for (c, s) in state.iter().enumerate() {
        let src = s.data();
        div.map_modes(|i, acc| acc + Complex64::new(0.0, wv.xi(i)[c]) * src[i]);
    }
    let div_norm = div.pairing(&div).max(0.0).sqrt();
    let shell = 0.375 * grid.length();
    let outer = ordered_sum(grid.len(), |i| {
        let x = grid.point(i);
        if x.iter().take(grid.dim()).any(|c| c.abs() > shell) {
            mag.data()[i]
        } else {
            0.0
        }
    });
    let total = ordered_sum(grid.len(), |i| mag.data()[i]);
    let three = grid.dim() == 3;
    let swirl = if options.swirl && three { Some(swirl_fraction(u)?) } else { None };
    let defect = if !options.symmetry_angles.is_empty() && three {
        Some(symmetry_defect(u, &options.symmetry_angles)?)
    } else {
        None
    };
    let d = Diagnostics {
        step,
        t,
        energy,
        enstrophy,
        div_norm,
        swirl_fraction: swirl,
        symmetry_defect: defect,
        boundary_energy_fraction: if total == 0.0 { 0.0 } else { outer / total },
    };
    if !(energy.is_finite() && enstrophy.is_finite()) {
        return Err(Error::NonFinite(format!("diagnostics at step {step}")));
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Abort {
    pub step: usize,
    pub t: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub dt: f64,
    /// One entry per step, starting with the initial state.
    pub diagnostics: Vec<Diagnostics>,
    /// `(t, u)` at the stored steps; always contains the first and the last good state.
    pub snapshots: Vec<(f64, VectorField)>,
    /// Set when the run stopped early; the last snapshot is the last good state.
    pub abort: Option<Abort>,
}

impl Trajectory {
    pub fn final_state(&self) -> &VectorField {
        &self.snapshots.last().expect("a trajectory stores its initial state").1
    }

    pub fn final_time(&self) -> f64 {
        self.snapshots.last().expect("non-empty").0
    }

    pub fn completed(&self) -> bool {
        self.abort.is_none()
    }

    /// Steps where `E_{m+1} > E_m (1 + rel_tol)`.
    pub fn energy_increases(&self, rel_tol: f64) -> Vec<usize> {
        self.diagnostics
            .windows(2)
            .filter(|w| w[1].energy > w[0].energy * (1.0 + rel_tol))
            .map(|w| w[1].step)
            .collect()
    }

    /// Largest `‖∇·u‖ / ‖u‖` over the recorded steps.
    pub fn max_relative_divergence(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| if d.energy == 0.0 { 0.0 } else { d.div_norm / (2.0 * d.energy).sqrt() })
            .fold(0.0, f64::max)
    }
}

/// Single trajectory state advanced one step at a time.
pub struct Marcher {
    stepper: MildStepper,
    state: Vec<Spectrum>,
    field: VectorField,
    step: usize,
    options: DiagnosticOptions,
}

impl Marcher {
    pub fn new(u0: &VectorField, config: &MildSolverConfig, options: DiagnosticOptions) -> Result<Self> {
        let stepper = MildStepper::new(*u0.grid(), config)?;
        let state = stepper.to_state(u0)?;
        let field = stepper.to_field(&state);
        Ok(Self { stepper, state, field, step: 0, options })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.stepper.dt()
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn diagnostics(&self) -> Result<Diagnostics> {
        diagnose(self.step, self.time(), &self.state, &self.field, &self.options)
    }

    /// Advances one step; on error the state is left unchanged.
    pub fn advance(&mut self) -> Result<()> {
        let dt = self.stepper.dt();
        let limit = cfl_limit(&self.field);
        if dt > limit {
            return Err(Error::Cfl { dt, limit });
        }
        let next = self.stepper.advance(&self.state);
        let field = self.stepper.to_field(&next);
        if field.components().iter().any(|c| c.data().iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite(format!("velocity after step {}", self.step + 1)));
        }
        self.state = next;
        self.field = field;
        self.step += 1;
        Ok(())
    }
}

/// Marches `u0` (projected first) to `config.total_time`.
///
/// A CFL violation or a non-finite state stops the run; the trajectory then
/// ends at the last good state and carries the reason in `abort`.
pub fn solve(u0: &VectorField, config: &MildSolverConfig, options: &DiagnosticOptions) -> Result<Trajectory> {
    let steps = config.steps()?;
    let mut m = Marcher::new(u0, config, options.clone())?;
    let mut diagnostics = vec![m.diagnostics()?];
    let mut snapshots = vec![(0.0, m.field().clone())];
    let mut abort = None;
    for s in 1..=steps {
        let outcome = m.advance().and_then(|_| m.diagnostics());
        match outcome {
            Ok(d) => diagnostics.push(d),
            Err(e @ (Error::Cfl { .. } | Error::NonFinite(_))) => {
                abort = Some(Abort { step: s, t: s as f64 * config.dt, reason: e.to_string() });
                break;
            }
            Err(e) => return Err(e),
        }
        let keep = s == steps || (config.store_every > 0 && s % config.store_every == 0);
        if keep {
            snapshots.push((m.time(), m.field().clone()));
        }
    }
    if abort.is_some() && snapshots.last().map(|s| s.0) != Some(m.time()) {
        snapshots.push((m.time(), m.field().clone()));
    }
    Ok(Trajectory { grid: *u0.grid(), dt: config.dt, diagnostics, snapshots, abort })
}
