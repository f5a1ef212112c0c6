use carlemanlab_core::commutator::lemma::LEMMA_TOLERANCE;
use carlemanlab_core::commutator::{class_sweep, streamed_bracket_discrepancies, CarlemanOperators, CarlemanParams, MatrixClass};
use carlemanlab_core::field::{BumpSampler, BumpSpec, Grid, SpatialExponent, TimeGrid, WeightParams};
use carlemanlab_core::weighted::{FamilyMember, MemberKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{line, sub_seeds};
use crate::baseline::Check;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::report::{num, Outcome, Series, Table};

/// Smallest accepted order of `[J,K]_direct - [J,K]_explicit` under `(N, M)` doubling.
pub const COMMUTATOR_MIN_ORDER: f64 = 1.9;

pub fn matrix_lemma(c: &ExperimentConfig) -> Result<Outcome> {
    let seed = c.require_seed()?;
    let (matrices, vectors) = (c.usize("matrices")?, c.usize("vectors")?);
    let (lo, hi) = (c.usize("min_dim")?, c.usize("max_dim")?);
    if matrices == 0 || vectors == 0 {
        return Err(CliError::config("matrices", "matrices and vectors must be positive"));
    }
    if lo == 0 || hi < lo {
        return Err(CliError::config("max_dim", format!("need 1 <= min_dim <= max_dim, got {lo}..{hi}")));
    }
    let seeds = sub_seeds(seed, MatrixClass::ALL.len());
    let reports: Vec<_> = MatrixClass::ALL
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(&class, &s)| class_sweep(class, matrices, vectors, (lo, hi), s))
        .collect();
    let mut out = Outcome {
        rows: Table::new(&[
            "class",
            "matrices",
            "vectors_per_matrix",
            "min_dim",
            "max_dim",
            "class_seed",
            "min_normalized_slack",
            "violations",
        ]),
        ..Outcome::default()
    };
    for (r, s) in reports.iter().zip(&seeds) {
        let label = r.class.label();
        out.rows.push(vec![
            label.into(),
            r.matrices.to_string(),
            r.trials_per_matrix.to_string(),
            lo.to_string(),
            hi.to_string(),
            s.to_string(),
            num(r.min_normalized_slack),
            r.violations.to_string(),
        ]);
        out.assert(
            &format!("lemma_{label}"),
            &format!("commutator_lab: ‖Ax‖² ≥ ⟨[J,K]x,x⟩ − {LEMMA_TOLERANCE:e}·‖x‖²‖A‖² for every {label} matrix"),
            r.violations == 0,
            format!("{} violations in {} checks", r.violations, r.matrices * r.trials_per_matrix),
        );
        out.metric(format!("min_normalized_slack.{label}"), r.min_normalized_slack, Some(Check::Match));
    }
    Ok(out)
}

fn params(dim: usize, n: usize, steps: usize, length: f64, a: f64, k: f64) -> Result<CarlemanParams> {
    // the bracket depends on k through the potential only, so the convention is irrelevant here
    let w = WeightParams::new(a, k, SpatialExponent::SingleK)?;
    Ok(CarlemanParams::new(w, Grid::new(dim, n, length)?, TimeGrid::default_with_steps(steps)?)?)
}

/// Discrepancies for every parameter set in one pass over the frames; all sets share one lattice.
fn discrepancies(sets: &[CarlemanParams], specs: &[BumpSpec]) -> Result<Vec<f64>> {
    let p = sets[0];
    let ops: Vec<CarlemanOperators> = sets.iter().map(|&s| CarlemanOperators::new(s)).collect();
    let member = FamilyMember { id: String::new(), seed: None, kind: MemberKind::Bumps { specs: specs.to_vec() } };
    Ok(streamed_bracket_discrepancies(&ops, |m| member.frame(&p.grid, &p.time_grid, m))?)
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

pub fn bracket(c: &ExperimentConfig) -> Result<Outcome> {
    let seed = c.require_seed()?;
    let dims = c.usizes("dims")?;
    if let Some(d) = dims.iter().find(|d| !(2..=3).contains(*d)) {
        return Err(CliError::config("dims", format!("dimensions are 2 or 3, got {d}")));
    }
    let ks = c.floats("k_values")?;
    let bumps = c.usize("bumps")?;
    if bumps == 0 {
        return Err(CliError::config("bumps", "need at least one bump"));
    }
    let (n, steps, length, a) = (c.usize("n")?, c.usize("steps")?, c.f64("length"), c.f64("a"));
    let (refine, refined_3d) = (c.bool("refine"), c.usize("refined_bumps_3d")?);
    let seeds = sub_seeds(seed, bumps);

    let mut out = Outcome {
        rows: Table::new(&[
            "n",
            "k",
            "bump",
            "bump_seed",
            "grid_n",
            "steps",
            "discrepancy",
            "fine_grid_n",
            "fine_steps",
            "fine_discrepancy",
        ]),
        ..Outcome::default()
    };
    let mut all_finite = true;
    let mut rms_lines = Vec::new();
    let mut order_lines = Vec::new();
    for &dim in &dims {
        let mut rms_points = Vec::new();
        let mut order_points = Vec::new();
        let coarse: Vec<CarlemanParams> = ks.iter().map(|&k| params(dim, n, steps, length, a, k)).collect::<Result<_>>()?;
        let fine: Vec<CarlemanParams> =
            ks.iter().map(|&k| params(dim, 2 * n, 2 * steps, length, a, k)).collect::<Result<_>>()?;
        let refined_count = if !refine {
            0
        } else if dim == 2 {
            bumps
        } else {
            refined_3d.min(bumps)
        };
        // per bump: coarse discrepancy for each k, and the fine ones when refined
        let results: Vec<(Vec<f64>, Option<Vec<f64>>)> = seeds
            .par_iter()
            .enumerate()
            .map(|(b, &s)| -> Result<(Vec<f64>, Option<Vec<f64>>)> {
                let (g, tg) = (&coarse[0].grid, &coarse[0].time_grid);
                let specs = BumpSampler::default().sample(&mut ChaCha8Rng::seed_from_u64(s), g, tg)?;
                let d = discrepancies(&coarse, &specs)?;
                let f = if b < refined_count { Some(discrepancies(&fine, &specs)?) } else { None };
                Ok((d, f))
            })
            .collect::<Result<_>>()?;
        for (ki, &k) in ks.iter().enumerate() {
            let at_k: Vec<(f64, Option<f64>)> = results.iter().map(|(d, f)| (d[ki], f.as_ref().map(|f| f[ki]))).collect();
            for (b, ((d, f), s)) in at_k.iter().zip(&seeds).enumerate() {
                all_finite &= d.is_finite() && f.map_or(true, |f| f.is_finite());
                out.rows.push(vec![
                    dim.to_string(),
                    num(k),
                    b.to_string(),
                    s.to_string(),
                    n.to_string(),
                    steps.to_string(),
                    num(*d),
                    if f.is_some() { (2 * n).to_string() } else { String::new() },
                    if f.is_some() { (2 * steps).to_string() } else { String::new() },
                    f.map(num).unwrap_or_default(),
                ]);
            }
            let all_rms = rms(at_k.iter().map(|r| r.0));
            rms_points.push((k, all_rms));
            out.metric(format!("discrepancy_rms.n{dim}.k{k}"), all_rms, Some(Check::Match));
            if refined_count > 0 {
                let refined = &at_k[..refined_count];
                let (rc, rf) = (rms(refined.iter().map(|r| r.0)), rms(refined.iter().map(|r| r.1.expect("refined"))));
                let order = (rc / rf).log2();
                order_points.push((k, order));
                out.metric(format!("order.n{dim}.k{k}"), order, Some(Check::Match));
                out.assert(
                    &format!("order_n{dim}_k{k}"),
                    &format!(
                        "commutator_lab: bracket_direct − bracket_explicit → 0 under (N,M) doubling with order ≥ {COMMUTATOR_MIN_ORDER}"
                    ),
                    order >= COMMUTATOR_MIN_ORDER,
                    format!(
                        "order {order:.3} from rms {rc:.3e} at ({n},{steps}) to {rf:.3e} at ({},{}) over {refined_count} bumps",
                        2 * n,
                        2 * steps
                    ),
                );
            }
        }
        rms_lines.push(line(format!("n = {dim}"), rms_points));
        if !order_points.is_empty() {
            order_lines.push(line(format!("n = {dim}"), order_points));
        }
    }
    out.assert(
        "discrepancies_finite",
        "commutator_lab: bracket discrepancies are finite on compactly supported bumps",
        all_finite,
        format!("{} evaluations", out.rows.rows.len()),
    );
    if refine && dims.contains(&3) && refined_3d < bumps {
        out.note(format!("3D order measured on the first {} of {bumps} bumps", refined_3d.min(bumps)));
    }
    out.series.push(Series {
        name: "discrepancy_vs_k".into(),
        title: format!("relative [J,K] discrepancy at N = {n}, M = {steps}"),
        x_label: "k".into(),
        y_label: "rms discrepancy".into(),
        log_x: false,
        log_y: true,
        lines: rms_lines,
    });
    if !order_lines.is_empty() {
        out.series.push(Series {
            name: "order_vs_k".into(),
            title: "observed refinement order".into(),
            x_label: "k".into(),
            y_label: "order".into(),
            log_x: false,
            log_y: false,
            lines: order_lines,
        });
    }
    Ok(out)
}
