//! `a`-sweeps of the weighted estimate over a family, collected into a [`RatioReport`].

use serde::{Deserialize, Serialize};

use super::family::FamilyMember;
use super::theorem::TheoremIntegrals;
use crate::error::{Error, Result};
use crate::field::{Grid, SpatialExponent, TimeGrid, WeightParams};

/// One `(member, a, k)` evaluation. `lhs`/`rhs` overflow to infinity for large
/// `a`; the logarithms are always finite when the side is nonzero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub family_id: String,
    pub seed: Option<u64>,
    pub n: usize,
    pub grid_n: usize,
    pub steps: usize,
    pub t_minus: f64,
    pub t_plus: f64,
    pub a: f64,
    pub k: f64,
    pub convention: SpatialExponent,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub ln_lhs: f64,
    pub ln_rhs: f64,
    /// `ln_lhs - ln_rhs`; `ratio` itself underflows for large `a`.
    pub ln_ratio: f64,
    pub log_domain: bool,
    /// Change of `ln h^{-2a}` over one time step at `T-`.
    pub log_weight_step: f64,
}

/// Refinement stability is only meaningful when the temporal weight changes
/// by at most this much (in log) per time step.
pub const RESOLVED_LOG_WEIGHT_STEP: f64 = 2.0;

/// `2a dt (1/T- - 1)`, the largest per-step change of `ln h^{-2a}`.
pub fn log_weight_step(a: f64, time_grid: &TimeGrid) -> f64 {
    2.0 * a * time_grid.dt() * (1.0 / time_grid.t_minus() - 1.0).abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub family: String,
    pub rows: Vec<RatioRow>,
    /// Largest ratio over all rows.
    pub c_emp: f64,
    /// `(member, a, relative change of the ratio)` against a refined run.
    pub refinement_deltas: Vec<(String, f64, f64)>,
    /// Members left out, with the reason.
    pub skipped: Vec<String>,
}

impl RatioReport {
    fn new(family: &str, rows: Vec<RatioRow>, skipped: Vec<String>) -> Self {
        let c_emp = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        Self { family: family.to_string(), rows, c_emp, refinement_deltas: Vec::new(), skipped }
    }

    /// Every ratio is a finite positive number, judged in log form.
    pub fn all_finite(&self) -> bool {
        self.rows.iter().all(|r| r.ratio.is_finite() && r.ln_ratio.is_finite())
    }

    /// Members whose lhs decreases somewhere as `a` grows.
    pub fn lhs_monotonicity_violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        for id in self.member_ids() {
            let mut rows: Vec<&RatioRow> = self.rows.iter().filter(|r| r.family_id == id).collect();
            rows.sort_by(|x, y| x.a.total_cmp(&y.a));
            if rows.windows(2).any(|w| w[1].ln_lhs < w[0].ln_lhs) {
                bad.push(id);
            }
        }
        bad
    }

    pub fn member_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        for r in &self.rows {
            if !ids.contains(&r.family_id) {
                ids.push(r.family_id.clone());
            }
        }
        ids
    }

    /// Ratio against `a` for one member, sorted by `a`.
    pub fn trend(&self, member: &str) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self.rows.iter().filter(|r| r.family_id == member).map(|r| (r.a, r.ratio)).collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        v
    }

    /// Fills `refinement_deltas` from a run of the same family on a finer lattice.
    pub fn compare_refined(&mut self, fine: &RatioReport) {
        self.refinement_deltas = self
            .rows
            .iter()
            .filter_map(|r| {
                let f = fine.rows.iter().find(|f| f.family_id == r.family_id && f.a == r.a && f.k == r.k)?;
                Some((r.family_id.clone(), r.a, (f.ratio - r.ratio).abs() / r.ratio))
            })
            .collect();
    }

    pub fn max_refinement_delta(&self) -> Option<f64> {
        self.refinement_deltas.iter().map(|d| d.2).reduce(f64::max)
    }

    /// Largest refinement change over rows whose temporal weight is resolved.
    pub fn max_resolved_refinement_delta(&self) -> Option<f64> {
        self.refinement_deltas
            .iter()
            .filter(|(id, a, _)| {
                self.rows
                    .iter()
                    .any(|r| &r.family_id == id && r.a == *a && r.log_weight_step <= RESOLVED_LOG_WEIGHT_STEP)
            })
            .map(|d| d.2)
            .reduce(f64::max)
    }
}

/// Evaluates every member at every `a`; members with vanishing rhs are skipped.
///
/// Members are processed in the given order and rows are emitted in
/// `(member, a)` order, so the report is deterministic.
pub fn theorem_ratio_sweep(
    family_name: &str,
    family: &[FamilyMember],
    grid: &Grid,
    time_grid: &TimeGrid,
    a_values: &[f64],
    k: f64,
    convention: SpatialExponent,
) -> Result<RatioReport> {
    if a_values.is_empty() {
        return Err(Error::InvalidParameter("empty list of a values".into()));
    }
    let weight = WeightParams::new(a_values[0], k, convention)?;
    for &a in a_values {
        WeightParams::new(a, k, convention)?;
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for member in family {
        member.validate(grid, time_grid)?;
        let ints = TheoremIntegrals::from_frames(*grid, *time_grid, &weight, |m| member.frame(grid, time_grid, m))?;
        for &a in a_values {
            let (lhs, rhs) = (ints.lhs(a), ints.rhs(a));
            if rhs.is_zero() {
                skipped.push(format!("{} at a = {a}: rhs vanishes on the lattice", member.id));
                continue;
            }
            rows.push(RatioRow {
                family_id: member.id.clone(),
                seed: member.seed,
                n: grid.dim(),
                grid_n: grid.n(),
                steps: time_grid.steps(),
                t_minus: time_grid.t_minus(),
                t_plus: time_grid.t_plus(),
                a,
                k,
                convention,
                lhs: lhs.to_f64(),
                rhs: rhs.to_f64(),
                ratio: lhs.div(rhs).to_f64(),
                ln_lhs: lhs.ln_abs,
                ln_rhs: rhs.ln_abs,
                ln_ratio: lhs.ln_abs - rhs.ln_abs,
                log_domain: ints.uses_log_domain(a),
                log_weight_step: log_weight_step(a, time_grid),
            });
        }
    }
    Ok(RatioReport::new(family_name, rows, skipped))
}
