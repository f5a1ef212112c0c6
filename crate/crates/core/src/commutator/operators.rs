//! The conjugated heat operator `L`, `A = tL`, its parts `J` and `K`, and `[J,K]`.
//!
//! Time derivatives are centered differences with zero extension beyond the
//! first and last frames. Spatial derivatives are spectral; weight factors are
//! analytic.

use super::params::{CarlemanParams, Coefficients};
use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField, SpaceTimeField};
use crate::spectral::{Spectrum, Wavevectors};
use rustfft::num_complex::Complex64;

/// Spectral derivatives of one frame; parts that were not requested stay empty.
pub struct Derivatives {
    lap: Vec<f64>,
    grad: Vec<Vec<f64>>,
    hess: Vec<Vec<f64>>,
}

/// Which derivatives [`frame_derivatives`] computes.
#[derive(Clone, Copy, Debug)]
pub struct Want {
    pub lap: bool,
    pub grad: bool,
    pub hess: bool,
}

impl Want {
    pub const LAP: Want = Want { lap: true, grad: false, hess: false };
    pub const GRAD: Want = Want { lap: false, grad: true, hess: false };
    pub const LAP_GRAD: Want = Want { lap: true, grad: true, hess: false };
    pub const ALL: Want = Want { lap: true, grad: true, hess: true };
}

/// One forward transform, then one inverse per requested derivative.
pub fn frame_derivatives(f: &ScalarField, want: Want) -> Derivatives {
    let grid = *f.grid();
    let d = grid.dim();
    let s = Spectrum::forward(f);
    let wv = Wavevectors::new(&grid);
    let with = |m: &(dyn Fn([f64; 3]) -> Complex64 + Sync)| {
        let mut c = s.clone();
        c.map_modes(|i, v| v * m(wv.xi(i)));
        c.inverse().into_data()
    };
    let lap = if want.lap {
        with(&|xi| Complex64::new(-(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]), 0.0))
    } else {
        Vec::new()
    };
    let grad = if want.grad { (0..d).map(|i| with(&move |xi| Complex64::new(0.0, xi[i]))).collect() } else { Vec::new() };
    let hess = if want.hess {
        let mut h = vec![Vec::new(); d * d];
        for i in 0..d {
            for j in i..d {
                let hij = with(&move |xi| Complex64::new(-xi[i] * xi[j], 0.0));
                h[j * d + i] = hij.clone();
                h[i * d + j] = hij;
            }
        }
        h
    } else {
        Vec::new()
    };
    Derivatives { lap, grad, hess }
}

/// Centered difference in time, `(u_{m+1} - u_{m-1}) / (2 dt)`, with zero frames outside.
pub fn time_derivative(u: &SpaceTimeField) -> SpaceTimeField {
    let tg = *u.time_grid();
    let inv = 0.5 / tg.dt();
    SpaceTimeField::from_frames(*u.grid(), tg, |m, _| {
        let (prev, next) = neighbours(u.frames(), m);
        Ok(centered(prev, next, inv, u.grid()))
    })
    .expect("frames share the grid")
}

fn neighbours(frames: &[ScalarField], m: usize) -> (Option<&ScalarField>, Option<&ScalarField>) {
    (m.checked_sub(1).map(|p| &frames[p]), frames.get(m + 1))
}

fn centered(prev: Option<&ScalarField>, next: Option<&ScalarField>, inv: f64, grid: &Grid) -> ScalarField {
    let next = next.map(|f| f.data());
    let prev = prev.map(|f| f.data());
    let data = (0..grid.len())
        .map(|i| inv * (next.map_or(0.0, |n| n[i]) - prev.map_or(0.0, |p| p[i])))
        .collect();
    ScalarField::from_raw(*grid, data)
}

pub(crate) fn is_zero(f: &ScalarField) -> bool {
    f.data().iter().all(|v| *v == 0.0)
}

/// Operators bound to one parameter set, with the analytic coefficients sampled once.
pub struct CarlemanOperators {
    params: CarlemanParams,
    coef: Coefficients,
}

impl CarlemanOperators {
    pub fn new(params: CarlemanParams) -> Self {
        let coef = Coefficients::new(&params.grid, params.k());
        Self { params, coef }
    }

    pub fn params(&self) -> &CarlemanParams {
        &self.params
    }

    fn check(&self, u: &SpaceTimeField) -> Result<()> {
        if *u.grid() != self.params.grid || *u.time_grid() != self.params.time_grid {
            return Err(Error::ShapeMismatch("field and operator parameters use different grids".into()));
        }
        Ok(())
    }

    fn build(
        &self,
        u: &SpaceTimeField,
        frame: impl Fn(usize, f64) -> ScalarField + Sync,
    ) -> Result<SpaceTimeField> {
        self.check(u)?;
        SpaceTimeField::from_frames(self.params.grid, self.params.time_grid, |m, t| Ok(frame(m, t)))
    }

    /// `(next - prev) / (2 dt)`, with absent frames read as zero.
    pub fn time_difference(&self, prev: Option<&ScalarField>, next: Option<&ScalarField>) -> ScalarField {
        centered(prev, next, 0.5 / self.params.time_grid.dt(), &self.params.grid)
    }

    /// One frame of `L u`.
    pub fn l_frame(&self, prev: Option<&ScalarField>, f: &ScalarField, next: Option<&ScalarField>, t: f64) -> ScalarField {
        let c = &self.coef;
        let ut = self.time_difference(prev, next);
        let dv = frame_derivatives(f, Want::LAP_GRAD);
        let (ut, fd) = (ut.data(), f.data());
        let log_dh = (self.params.a() + 1.0) * (1.0 - t) / t;
        let data = (0..fd.len())
            .map(|i| {
                let drift: f64 = (0..dv.grad.len()).map(|d| c.drift[d][i] * dv.grad[d][i]).sum();
                ut[i] + dv.lap[i] + log_dh * fd[i] + drift + (c.c_j[i] + c.c_k[i]) * fd[i]
            })
            .collect();
        ScalarField::from_raw(*f.grid(), data)
    }

    /// One frame of `J v`; `J` acts pointwise in time.
    pub fn j_frame(&self, f: &ScalarField, t: f64) -> ScalarField {
        if is_zero(f) {
            return f.clone();
        }
        self.j_with(f, &frame_derivatives(f, Want::LAP), t)
    }

    /// [`Self::j_frame`] with the Laplacian of `f` already computed.
    pub fn j_with(&self, f: &ScalarField, dv: &Derivatives, t: f64) -> ScalarField {
        let c = &self.coef;
        let fd = f.data();
        let c0 = (self.params.a() + 1.0) * (1.0 - t) - 0.5;
        let data = (0..fd.len()).map(|i| t * dv.lap[i] + (t * c.c_j[i] + c0) * fd[i]).collect();
        ScalarField::from_raw(*f.grid(), data)
    }

    /// One frame of `K v`, given the neighbouring frames of `v`.
    pub fn k_frame(&self, prev: Option<&ScalarField>, f: &ScalarField, next: Option<&ScalarField>, t: f64) -> ScalarField {
        let ut = self.time_difference(prev, next);
        if is_zero(f) {
            return ut.scaled(t);
        }
        self.k_with(&ut, f, &frame_derivatives(f, Want::GRAD), t)
    }

    /// [`Self::k_frame`] with the time difference and gradient of `f` already computed.
    pub fn k_with(&self, ut: &ScalarField, f: &ScalarField, dv: &Derivatives, t: f64) -> ScalarField {
        let c = &self.coef;
        let ut = ut.data();
        let fd = f.data();
        let data = (0..fd.len())
            .map(|i| {
                let drift: f64 = (0..dv.grad.len()).map(|d| c.drift[d][i] * dv.grad[d][i]).sum();
                t * (ut[i] + drift + c.c_k[i] * fd[i]) + 0.5 * fd[i]
            })
            .collect();
        ScalarField::from_raw(*f.grid(), data)
    }

    /// One frame of the closed-form commutator.
    pub fn explicit_frame(&self, f: &ScalarField, t: f64) -> ScalarField {
        if is_zero(f) {
            return f.clone();
        }
        self.explicit_with(f, &frame_derivatives(f, Want::ALL), t)
    }

    /// [`Self::explicit_frame`] with all derivatives of `f` already computed.
    pub fn explicit_with(&self, f: &ScalarField, dv: &Derivatives, t: f64) -> ScalarField {
        let c = &self.coef;
        let d = self.params.n();
        let a1 = self.params.a() + 1.0;
        let fd = f.data();
        let t2 = t * t;
        let data = (0..fd.len())
            .map(|i| {
                let mut hess = 0.0;
                for ij in 0..d * d {
                    hess += c.hess[ij][i] * dv.hess[ij][i];
                }
                let mut v1 = 0.0;
                for k in 0..d {
                    v1 += c.v1x[k][i] * dv.grad[k][i];
                }
                (a1 * t - t * c.c_j[i] + t2 * c.v2[i]) * fd[i] + (t2 * c.lap[i] - t) * dv.lap[i] - t2 * hess
                    + t2 * v1
            })
            .collect();
        ScalarField::from_raw(*f.grid(), data)
    }

    /// `∂t u + Δu + (a+1)(h'/h) u + 4k x·∇u/q + 2kn u/q + 4k(k-1)|x|^2 u/q^2`.
    pub fn apply_l(&self, u: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.build(u, |m, t| {
            let (prev, next) = neighbours(u.frames(), m);
            self.l_frame(prev, u.frame(m), next, t)
        })
    }

    /// `A = tL`.
    pub fn apply_a(&self, v: &SpaceTimeField) -> Result<SpaceTimeField> {
        Ok(self.apply_l(v)?.mul_fn(|_, t| t))
    }

    /// `J = tΔ + 4k^2 t |x|^2/q^2 + (a+1)(1-t) - 1/2`.
    pub fn apply_j(&self, v: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.build(v, |m, t| self.j_frame(v.frame(m), t))
    }

    /// `K = t∂t + 4kt x·∇/q + 2kt(n/q - 2|x|^2/q^2) + 1/2`.
    pub fn apply_k(&self, v: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.build(v, |m, t| {
            let (prev, next) = neighbours(v.frames(), m);
            self.k_frame(prev, v.frame(m), next, t)
        })
    }

    /// Closed form `(a+1)t - tΔ - 4k^2 t|x|^2/q^2 + 8kt^2 Δ/q - 16kt^2 (x⊗x):∇^2/q^2 + t^2 V1 x·∇ + t^2 V2`.
    pub fn bracket_explicit(&self, v: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.build(v, |m, t| self.explicit_frame(v.frame(m), t))
    }

    /// `JK - KJ` by composition.
    pub fn bracket_direct(&self, v: &SpaceTimeField) -> Result<SpaceTimeField> {
        let jk = self.apply_j(&self.apply_k(v)?)?;
        let kj = self.apply_k(&self.apply_j(v)?)?;
        jk.sub(&kj)
    }
}

pub fn apply_l(u: &SpaceTimeField, params: &CarlemanParams) -> Result<SpaceTimeField> {
    CarlemanOperators::new(*params).apply_l(u)
}

pub fn apply_j(v: &SpaceTimeField, params: &CarlemanParams) -> Result<SpaceTimeField> {
    CarlemanOperators::new(*params).apply_j(v)
}

pub fn apply_k(v: &SpaceTimeField, params: &CarlemanParams) -> Result<SpaceTimeField> {
    CarlemanOperators::new(*params).apply_k(v)
}

pub fn apply_a(v: &SpaceTimeField, params: &CarlemanParams) -> Result<SpaceTimeField> {
    CarlemanOperators::new(*params).apply_a(v)
}

pub fn apply_bracket_explicit(v: &SpaceTimeField, params: &CarlemanParams) -> Result<SpaceTimeField> {
    CarlemanOperators::new(*params).bracket_explicit(v)
}

pub fn apply_bracket_direct(v: &SpaceTimeField, params: &CarlemanParams) -> Result<SpaceTimeField> {
    CarlemanOperators::new(*params).bracket_direct(v)
}
