//! The substitution `v = h^{-(a+1)} (1+|x|^2)^{-k} u` and the energy identity behind it.

use serde::{Deserialize, Serialize};

use super::operators::{time_derivative, CarlemanOperators};
use super::params::CarlemanParams;
use crate::error::{Error, Result};
use crate::field::quadrature::{frame_integrals, InnerProduct, LogReal};
use crate::field::weights::{log_temporal_weight, norm_squared};
use crate::field::SpaceTimeField;
use crate::spectral::laplacian;

/// Above this `a`, or when `ln h^{-(a+1)}` exceeds [`LOG_OVERFLOW_GUARD`], the
/// transform stores `v e^{-S}` with a single global log scale `S`.
pub const LOG_DOMAIN_A: f64 = 200.0;
pub const LOG_OVERFLOW_GUARD: f64 = 300.0;

/// `v = e^{log_scale} * field`.
///
/// The scale is the largest log factor over frames where `u` is nonzero, so
/// the earliest supported frame is O(1); for very large `a` later frames may
/// underflow, which only drops terms that are negligible in every weighted sum.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedField {
    pub field: SpaceTimeField,
    pub log_scale: f64,
    pub rescaled: bool,
}

fn log_temporal_factor(a: f64, t: f64) -> Result<f64> {
    Ok(-(a + 1.0) * log_temporal_weight(t)?)
}

pub fn v_transform(u: &SpaceTimeField, params: &CarlemanParams) -> Result<WeightedField> {
    let (a, k) = (params.a(), params.k());
    let tg = *u.time_grid();
    let logs: Vec<f64> = tg.times().map(|t| log_temporal_factor(a, t)).collect::<Result<_>>()?;
    let max_log = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let supported = logs
        .iter()
        .zip(u.frames())
        .filter(|(_, f)| f.data().iter().any(|x| *x != 0.0))
        .map(|(l, _)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    let rescaled = a >= LOG_DOMAIN_A || max_log > LOG_OVERFLOW_GUARD;
    let log_scale = match (rescaled, supported.is_finite()) {
        (false, _) => 0.0,
        (true, true) => supported,
        (true, false) => max_log,
    };
    let field = SpaceTimeField::from_frames(*u.grid(), tg, |m, _| {
        let c = (logs[m] - log_scale).exp();
        Ok(u.frame(m).mul_fn(|x| c * (1.0 + norm_squared(x)).powf(-k)))
    })?;
    Ok(WeightedField { field, log_scale, rescaled })
}

pub fn v_inverse(v: &WeightedField, params: &CarlemanParams) -> Result<SpaceTimeField> {
    let (a, k) = (params.a(), params.k());
    let tg = *v.field.time_grid();
    let logs: Vec<f64> = tg.times().map(|t| log_temporal_factor(a, t)).collect::<Result<_>>()?;
    SpaceTimeField::from_frames(*v.field.grid(), tg, |m, _| {
        let c = (v.log_scale - logs[m]).exp();
        let f = v.field.frame(m).mul_fn(|x| c * (1.0 + norm_squared(x)).powf(k));
        if f.data().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("inverse weighting".into()));
        }
        Ok(f)
    })
}

/// `‖Av‖^2` against `∫ h^{-2a} (1+|x|^2)^{-2k} |∂t u + Δu|^2`, both in log form.
///
/// In the continuum `‖Av‖^2 = ∫ e^{2t} h^{-2a} (1+|x|^2)^{-2k} |∂t u + Δu|^2`,
/// so the ratio lies in `[e^{2T-}, e^{2T+}]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyComparison {
    pub ln_av_squared: f64,
    pub ln_weighted_rhs: f64,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub rescaled: bool,
}

impl EnergyComparison {
    /// Whether the ratio sits in the window, widened by a relative tolerance.
    pub fn within_window(&self, tol: f64) -> bool {
        self.ratio >= self.lower * (1.0 - tol) && self.ratio <= self.upper * (1.0 + tol)
    }
}

pub fn energy_comparison(u: &SpaceTimeField, params: &CarlemanParams) -> Result<EnergyComparison> {
    let ops = CarlemanOperators::new(*params);
    let v = v_transform(u, params)?;
    let av = ops.apply_a(&v.field)?;
    let av2 = av.inner(&av)?;
    let ln_av_squared = av2.ln() + 2.0 * v.log_scale;

    let heat_part = time_derivative(u).add(&SpaceTimeField::from_frames(*u.grid(), *u.time_grid(), |m, _| {
        Ok(laplacian(u.frame(m)))
    })?)?;
    let sq = SpaceTimeField::from_frames(*u.grid(), *u.time_grid(), |m, _| heat_part.frame(m).map(|x| x * x))?;
    let k = params.k();
    let per_frame = frame_integrals(&sq, &|x| (1.0 + norm_squared(x)).powf(-2.0 * k))?;
    let tg = *u.time_grid();
    let terms: Vec<LogReal> = per_frame
        .iter()
        .enumerate()
        .map(|(m, s)| {
            let t = tg.time(m);
            LogReal::from_f64(s * tg.dt()).mul_exp(-2.0 * params.a() * log_temporal_weight(t).unwrap_or(f64::NAN))
        })
        .collect();
    let rhs = LogReal::sum(&terms);
    if rhs.is_zero() {
        return Err(Error::Domain("(∂t + Δ)u vanishes on the lattice".into()));
    }
    Ok(EnergyComparison {
        ln_av_squared,
        ln_weighted_rhs: rhs.ln_abs,
        ratio: (ln_av_squared - rhs.ln_abs).exp(),
        lower: (2.0 * tg.t_minus()).exp(),
        upper: (2.0 * tg.t_plus()).exp(),
        rescaled: v.rescaled,
    })
}
