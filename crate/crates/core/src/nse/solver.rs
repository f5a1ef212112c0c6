//! Integrating-factor Runge-Kutta integrator for the mild form of the
//! incompressible Navier-Stokes equations with unit viscosity on a periodic box.
//!
//! The state lives in Fourier space. With `E(s) = e^{-s|xi|^2}` and
//! `N(u) = P[-∇·(u⊗u) + ∇·F]`, every scheme below integrates
//! `u(t+dt) = E(dt) u(t) + ∫ E(dt - τ) N(u(t+τ)) dτ`
//! exactly in its linear part, so there is no diffusive step restriction.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, TensorField, VectorField};
use crate::spectral::ops::{from_spectra, leray_in_place, spectra};
use crate::spectral::{DealiasMask, Spectrum, Wavevectors};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    IntegratingFactorRk2,
    IntegratingFactorRk4,
}

impl Scheme {
    pub fn order(&self) -> usize {
        match self {
            Scheme::IntegratingFactorRk2 => 2,
            Scheme::IntegratingFactorRk4 => 4,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Scheme::IntegratingFactorRk2 => "integrating_factor_rk2",
            Scheme::IntegratingFactorRk4 => "integrating_factor_rk4",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MildSolverConfig {
    pub dt: f64,
    pub total_time: f64,
    pub dealias: bool,
    pub scheme: Scheme,
    /// Tensor potential `F` of a static forcing `f = ∇·F`.
    pub forcing: Option<TensorField>,
    /// Keep every `store_every`-th state in the trajectory; `0` keeps only the ends.
    pub store_every: usize,
}

impl MildSolverConfig {
    pub fn new(dt: f64, total_time: f64) -> Result<Self> {
        let c = Self {
            dt,
            total_time,
            dealias: true,
            scheme: Scheme::default(),
            forcing: None,
            store_every: 0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_forcing(mut self, forcing: TensorField) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn with_store_every(mut self, every: usize) -> Self {
        self.store_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.total_time >= 0.0 && self.total_time.is_finite()) {
            return Err(Error::Domain(format!(
                "only forward integration is provided, got total time {}",
                self.total_time
            )));
        }
        Ok(())
    }

    /// Number of steps; `total_time` must be a whole number of steps.
    pub fn steps(&self) -> Result<usize> {
        self.validate()?;
        let s = (self.total_time / self.dt).round();
        if (s * self.dt - self.total_time).abs() > 1e-9 * self.total_time.max(self.dt) {
            return Err(Error::InvalidParameter(format!(
                "total time {} is not a multiple of dt = {}",
                self.total_time, self.dt
            )));
        }
        Ok(s as usize)
    }
}

/// Advective limit `dx / (2 max|u|)`; infinite for `u = 0`.
pub fn cfl_limit(u: &VectorField) -> f64 {
    let m = u.max_magnitude();
    if m == 0.0 {
        f64::INFINITY
    } else {
        u.grid().spacing() / (2.0 * m)
    }
}

pub fn check_cfl(u: &VectorField, dt: f64) -> Result<()> {
    let limit = cfl_limit(u);
    if dt > limit {
        return Err(Error::Cfl { dt, limit });
    }
    Ok(())
}

/// Precomputed symbols for one grid and time step.
pub struct MildStepper {
    grid: Grid,
    dt: f64,
    scheme: Scheme,
    mask: Option<DealiasMask>,
    xi: Vec<[f64; 3]>,
    decay_full: Vec<f64>,
    decay_half: Vec<f64>,
    forcing: Option<Vec<Spectrum>>,
}

fn zero_nyquist(s: &mut Spectrum, wv: &Wavevectors) {
    s.map_modes(|i, c| if wv.is_nyquist(i) { Complex64::new(0.0, 0.0) } else { c });
}

impl MildStepper {
    pub fn new(grid: Grid, config: &MildSolverConfig) -> Result<Self> {
        config.validate()?;
        let wv = Wavevectors::new(&grid);
        let len = crate::spectral::fft::spectrum_len(&grid);
        let xi: Vec<[f64; 3]> = (0..len).map(|i| wv.xi(i)).collect();
        let k2: Vec<f64> = (0..len).map(|i| wv.xi_squared(i)).collect();
        let decay = |s: f64| k2.iter().map(|k| (-s * k).exp()).collect::<Vec<f64>>();
        let mask = config.dealias.then(|| DealiasMask::two_thirds(grid));
        let forcing = match &config.forcing {
            None => None,
            Some(f) => {
                if *f.grid() != grid {
                    return Err(Error::ShapeMismatch("forcing potential lives on a different grid".into()));
                }
                let d = grid.dim();
                let mut out: Vec<Spectrum> = (0..d).map(|_| Spectrum::zeros(grid)).collect();
                for (i, oi) in out.iter_mut().enumerate() {
                    for j in 0..d {
                        let s = Spectrum::forward(f.get(i, j));
                        oi.data_mut().iter_mut().zip(s.data()).enumerate().for_each(|(m, (o, v))| *o += I * xi[m][j] * v);
                    }
                    zero_nyquist(oi, &wv);
                    if let Some(m) = &mask {
                        m.apply(oi);
                    }
                }
                leray_in_place(&mut out);
                Some(out)
            }
        };
        Ok(Self {
            grid,
            dt: config.dt,
            scheme: config.scheme,
            mask,
            xi,
            decay_full: decay(config.dt),
            decay_half: decay(0.5 * config.dt),
            forcing,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Projected, dealiased spectra of a physical field.
    pub fn to_state(&self, u: &VectorField) -> Result<Vec<Spectrum>> {
        if *u.grid() != self.grid {
            return Err(Error::ShapeMismatch("velocity lives on a different grid".into()));
        }
        let mut s = spectra(u);
        let wv = Wavevectors::new(&self.grid);
        for c in &mut s {
            zero_nyquist(c, &wv);
        }
        leray_in_place(&mut s);
        Ok(s)
    }

    pub fn to_field(&self, state: &[Spectrum]) -> VectorField {
        from_spectra(state)
    }

    /// `P[-∇·(u⊗u) + f]` in Fourier space.
    pub fn nonlinear(&self, state: &[Spectrum]) -> Vec<Spectrum> {
        let d = state.len();
        let physical: Vec<_> = state
            .iter()
            .map(|s| match &self.mask {
                Some(m) => {
                    let mut t = s.clone();
                    m.apply(&mut t);
                    t.inverse()
                }
                None => s.inverse(),
            })
            .collect();
        let mut out: Vec<Spectrum> = (0..d).map(|_| Spectrum::zeros(self.grid)).collect();
        for i in 0..d {
            for j in i..d {
                let prod = physical[i].pointwise_mul(&physical[j]).expect("components share one grid");
                let mut p = Spectrum::forward(&prod);
                if let Some(m) = &self.mask {
                    m.apply(&mut p);
                }
                // -∂_j (u_i u_j) into component i and, by symmetry, -∂_i into component j
                let xi = &self.xi;
                out[i].data_mut().iter_mut().zip(p.data()).enumerate().for_each(|(m, (o, v))| *o -= I * xi[m][j] * v);
                if i != j {
                    out[j].data_mut().iter_mut().zip(p.data()).enumerate().for_each(|(m, (o, v))| *o -= I * xi[m][i] * v);
                }
            }
        }
        if let Some(f) = &self.forcing {
            for (o, fi) in out.iter_mut().zip(f) {
                o.axpy(1.0, fi);
            }
        }
        leray_in_place(&mut out);
        let wv = Wavevectors::new(&self.grid);
        for o in &mut out {
            zero_nyquist(o, &wv);
        }
        out
    }

    fn decay(state: &[Spectrum], factor: &[f64]) -> Vec<Spectrum> {
        state
            .iter()
            .map(|s| {
                let mut t = s.clone();
                t.map_modes(|m, c| c * factor[m]);
                t
            })
            .collect()
    }

    fn combine(base: &[Spectrum], terms: &[(f64, &[Spectrum])]) -> Vec<Spectrum> {
        let mut out = base.to_vec();
        for (c, t) in terms {
            for (o, s) in out.iter_mut().zip(t.iter()) {
                o.axpy(*c, s);
            }
        }
        out
    }

    /// `e^{dtΔ}` applied to a state.
    pub fn linear_step(&self, state: &[Spectrum]) -> Vec<Spectrum> {
        Self::decay(state, &self.decay_full)
    }

    /// One step of the configured scheme.
    pub fn advance(&self, state: &[Spectrum]) -> Vec<Spectrum> {
        let h = self.dt;
        let mut next = match self.scheme {
            Scheme::IntegratingFactorRk2 => {
                let k1 = self.nonlinear(state);
                let predictor = Self::decay(&Self::combine(state, &[(h, &k1)]), &self.decay_full);
                let k2 = self.nonlinear(&predictor);
                let e_u = Self::decay(state, &self.decay_full);
                let e_k1 = Self::decay(&k1, &self.decay_full);
                Self::combine(&e_u, &[(0.5 * h, &e_k1), (0.5 * h, &k2)])
            }
            Scheme::IntegratingFactorRk4 => {
                let e_half = Self::decay(state, &self.decay_half);
                let k1 = self.nonlinear(state);
                let e_k1_half = Self::decay(&k1, &self.decay_half);
                let a = Self::combine(&e_half, &[(0.5 * h, &e_k1_half)]);
                let k2 = self.nonlinear(&a);
                let b = Self::combine(&e_half, &[(0.5 * h, &k2)]);
                let k3 = self.nonlinear(&b);
                let e_full = Self::decay(state, &self.decay_full);
                let e_k3_half = Self::decay(&k3, &self.decay_half);
                let c = Self::combine(&e_full, &[(h, &e_k3_half)]);
                let k4 = self.nonlinear(&c);
                let e_k1 = Self::decay(&k1, &self.decay_full);
                let e_k23 = Self::decay(&Self::combine(&k2, &[(1.0, &k3)]), &self.decay_half);
                Self::combine(&e_full, &[(h / 6.0, &e_k1), (h / 3.0, &e_k23), (h / 6.0, &k4)])
            }
        };
        leray_in_place(&mut next);
        next
    }
}

/// One mild step from a physical field, with the CFL check on the input.
pub fn step_mild(u: &VectorField, dt: f64, config: &MildSolverConfig) -> Result<VectorField> {
    let mut c = config.clone();
    c.dt = dt;
    check_cfl(u, dt)?;
    let stepper = MildStepper::new(*u.grid(), &c)?;
    let next = stepper.advance(&stepper.to_state(u)?);
    Ok(stepper.to_field(&next))
}
