use carlemanlab_core::field::{
    make_bump, BumpSampler, BumpSpec, Grid, ScalarField, SpaceTimeField, SpatialExponent, TemporalSupport, TensorField,
    TimeGrid, WeightParams,
};
use carlemanlab_core::spectral::random_smooth_field;
use carlemanlab_core::weighted::{
    ap_failure_probe, cutoff_convergence_study, cz_lhs, cz_rhs, standard_family, theorem_ratio_sweep, CUTOFF_CAUCHY_TOL,
    RESOLVED_LOG_WEIGHT_STEP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{convention, line, max_of, sub_seeds};
use crate::baseline::Check;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::report::{num, Outcome, Series, Table};

/// Largest relative change of a ratio between a lattice and its refinement.
pub const REFINEMENT_TOL: f64 = 0.1;
/// `ratio <= 1 + PLANCHEREL_SLACK` whenever the weight is trivial.
pub const PLANCHEREL_SLACK: f64 = 1e-10;

pub fn sweep(c: &ExperimentConfig) -> Result<Outcome> {
    let seed = c.require_seed()?;
    let grid = Grid::new(c.usize("dim")?, c.usize("n")?, c.f64("length"))?;
    let tg = TimeGrid::default_with_steps(c.usize("steps")?)?;
    let a_values = c.floats("a_values")?;
    let ks = c.floats("k_values")?;
    let conv = convention(c)?;
    let family = standard_family(seed, &grid, &tg)?;
    let fine = if c.bool("refine") {
        let g = Grid::new(grid.dim(), 2 * grid.n(), grid.length())?;
        let t = tg.refined();
        Some((g, t, standard_family(seed, &g, &t)?))
    } else {
        None
    };

    let mut out = Outcome {
        rows: Table::new(&[
            "family_id",
            "seed",
            "n",
            "grid_n",
            "steps",
            "t_minus",
            "t_plus",
            "a",
            "k",
            "convention",
            "lhs",
            "rhs",
            "ratio",
            "ln_lhs",
            "ln_rhs",
            "ln_ratio",
            "log_domain",
            "log_weight_step",
        ]),
        ..Outcome::default()
    };
    for &k in &ks {
        let mut report = theorem_ratio_sweep("standard", &family, &grid, &tg, &a_values, k, conv)?;
        for r in &report.rows {
            out.rows.push(vec![
                r.family_id.clone(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                r.n.to_string(),
                r.grid_n.to_string(),
                r.steps.to_string(),
                num(r.t_minus),
                num(r.t_plus),
                num(r.a),
                num(r.k),
                r.convention.label().into(),
                num(r.lhs),
                num(r.rhs),
                num(r.ratio),
                num(r.ln_lhs),
                num(r.ln_rhs),
                num(r.ln_ratio),
                r.log_domain.to_string(),
                num(r.log_weight_step),
            ]);
        }
        for s in &report.skipped {
            out.note(format!("k = {k}: skipped {s}"));
        }
        out.assert(
            &format!("ratios_finite_k{k}"),
            "weighted_inequality: every ratio lhs/rhs is finite, with log-domain arithmetic at large a",
            report.all_finite(),
            format!("{} rows, largest ln ratio {:.4}", report.rows.len(), max_of(report.rows.iter().map(|r| r.ln_ratio))),
        );
        let bad = report.lhs_monotonicity_violations();
        out.assert(
            &format!("lhs_monotone_k{k}"),
            "weighted_inequality: lhs is non-decreasing in a for data supported in t < 1",
            bad.is_empty(),
            if bad.is_empty() { "all members monotone".to_string() } else { format!("decreasing for {}", bad.join(", ")) },
        );
        if let Some((fg, ft, ff)) = &fine {
            let fine_report = theorem_ratio_sweep("standard", ff, fg, ft, &a_values, k, conv)?;
            report.compare_refined(&fine_report);
            let delta = report.max_resolved_refinement_delta();
            out.assert(
                &format!("refinement_k{k}"),
                &format!(
                    "weighted_inequality: ratios move by at most {REFINEMENT_TOL} under refinement where ln h^(-2a) changes by at most {RESOLVED_LOG_WEIGHT_STEP} per step"
                ),
                delta.is_some_and(|d| d <= REFINEMENT_TOL),
                match delta {
                    Some(d) => format!("largest resolved change {d:.4}"),
                    None => "no resolved rows to compare".into(),
                },
            );
        }
        let c_emp = report.c_emp;
        out.metric(format!("c_emp.k{k}.standard"), c_emp, Some(Check::UpperBound));
        out.metric(
            format!("max_ln_ratio.k{k}.standard"),
            max_of(report.rows.iter().map(|r| r.ln_ratio)),
            Some(Check::UpperBound),
        );
        out.series.push(Series {
            name: format!("ratio_vs_a_k{k}"),
            title: format!("weighted estimate, k = {k}, {}", conv.label()),
            x_label: "a".into(),
            y_label: "ln(lhs/rhs)".into(),
            log_x: true,
            log_y: false,
            lines: report.member_ids().iter().map(|id| {
                let pts = report.rows.iter().filter(|r| &r.family_id == id).map(|r| (r.a, r.ln_ratio)).collect();
                line(id.clone(), pts)
            })
            .collect(),
        });
    }
    Ok(out)
}

/// Superposition of seeded bumps times a seeded coefficient matrix.
fn bump_tensor(seed: u64, grid: &Grid) -> Result<TensorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs = BumpSampler::default().sample(&mut rng, grid, &TimeGrid::default_with_steps(2)?)?;
    let mut b = ScalarField::zeros(*grid);
    for s in &specs {
        b.axpy(1.0, &make_bump(&BumpSpec { temporal: None, ..*s }, grid)?)?;
    }
    let d = grid.dim();
    let comps = (0..d * d).map(|_| b.scaled(rng.random_range(-1.0..1.0))).collect();
    Ok(TensorField::new(comps)?)
}

fn noise_tensor(seed: u64, grid: &Grid) -> Result<TensorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let comps = (0..d * d).map(|_| random_smooth_field(*grid, &mut rng, 1.5)).collect();
    Ok(TensorField::new(comps)?.mean_free())
}

fn sides(f: &TensorField, k: f64) -> Result<(f64, f64)> {
    Ok((cz_lhs(f, k)?, cz_rhs(f, k)?))
}

pub fn cz(c: &ExperimentConfig) -> Result<Outcome> {
    let seed = c.require_seed()?;
    let (dim, length) = (c.usize("dim")?, c.f64("length"));
    let grid = Grid::new(dim, c.usize("n")?, length)?;
    let ks = c.floats("k_values")?;
    for &k in &ks {
        WeightParams::check_cz_range(k)?;
    }
    let (members, noise) = (c.usize("members")?, c.usize("noise_fields")?);
    if members == 0 {
        return Err(CliError::config("members", "need at least one bump tensor"));
    }
    let fine_grid = if c.bool("refine") { Some(Grid::new(dim, c.usize("fine_n")?, length)?) } else { None };
    let seeds = sub_seeds(seed, members + noise);

    let mut out = Outcome {
        rows: Table::new(&["member", "member_seed", "k", "grid_n", "lhs", "rhs", "ratio", "fine_grid_n", "fine_ratio", "refinement_delta"]),
        ..Outcome::default()
    };
    // (member, k, ratio, fine ratio)
    let cases: Vec<(usize, f64)> = (0..members).flat_map(|m| ks.iter().map(move |&k| (m, k))).collect();
    let results: Vec<(f64, f64, Option<f64>)> = cases
        .par_iter()
        .map(|&(m, k)| -> Result<(f64, f64, Option<f64>)> {
            let (lhs, rhs) = sides(&bump_tensor(seeds[m], &grid)?, k)?;
            let fine = match &fine_grid {
                Some(g) => {
                    let (l, r) = sides(&bump_tensor(seeds[m], g)?, k)?;
                    Some(l / r)
                }
                None => None,
            };
            Ok((lhs, rhs, fine))
        })
        .collect::<Result<_>>()?;
    let mut finite = true;
    let mut plancherel_worst: f64 = 0.0;
    let mut worst_delta: f64 = 0.0;
    for (&(m, k), &(lhs, rhs, fine)) in cases.iter().zip(&results) {
        let ratio = lhs / rhs;
        finite &= ratio.is_finite();
        if k == 0.0 {
            plancherel_worst = plancherel_worst.max(ratio);
        }
        let delta = fine.map(|f| (f - ratio).abs() / f);
        if let Some(d) = delta {
            worst_delta = worst_delta.max(d);
        }
        out.rows.push(vec![
            format!("bumps-{m}"),
            seeds[m].to_string(),
            num(k),
            grid.n().to_string(),
            num(lhs),
            num(rhs),
            num(ratio),
            fine_grid.map(|g| g.n().to_string()).unwrap_or_default(),
            fine.map(num).unwrap_or_default(),
            delta.map(num).unwrap_or_default(),
        ]);
    }
    for i in 0..noise {
        let s = seeds[members + i];
        let (lhs, rhs) = sides(&noise_tensor(s, &grid)?, 0.0)?;
        let ratio = lhs / rhs;
        finite &= ratio.is_finite();
        plancherel_worst = plancherel_worst.max(ratio);
        out.rows.push(vec![
            format!("noise-{i}"),
            s.to_string(),
            num(0.0),
            grid.n().to_string(),
            num(lhs),
            num(rhs),
            num(ratio),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    out.assert(
        "ratios_finite",
        "weighted_inequality: cz_ratio is finite for k in [0, 2.5)",
        finite,
        format!("{} ratios", out.rows.rows.len()),
    );
    if ks.contains(&0.0) || noise > 0 {
        out.assert(
            "plancherel_k0",
            &format!("weighted_inequality: at k = 0 the ratio is at most 1 + {PLANCHEREL_SLACK:e} for mean-free data"),
            plancherel_worst <= 1.0 + PLANCHEREL_SLACK,
            format!("largest k = 0 ratio {plancherel_worst:.15}"),
        );
    }
    if let Some(g) = fine_grid {
        out.assert(
            "refinement",
            &format!("weighted_inequality: cz_ratio changes by at most {REFINEMENT_TOL} from N = {} to N = {}", grid.n(), g.n()),
            worst_delta <= REFINEMENT_TOL,
            format!("largest relative change {worst_delta:.4}"),
        );
    }
    let mut lines = Vec::new();
    for m in 0..members {
        let pts = cases.iter().zip(&results).filter(|(cs, _)| cs.0 == m).map(|(cs, r)| (cs.1, r.0 / r.1)).collect();
        lines.push(line(format!("bumps-{m}"), pts));
    }
    for &k in &ks {
        let worst = max_of(cases.iter().zip(&results).filter(|(cs, _)| cs.1 == k).map(|(_, r)| r.0 / r.1));
        out.metric(format!("max_ratio.k{k}"), worst, Some(Check::UpperBound));
    }
    out.series.push(Series {
        name: "ratio_vs_k".into(),
        title: format!("weighted divergence-structure ratio, N = {}", grid.n()),
        x_label: "k".into(),
        y_label: "lhs/rhs".into(),
        log_x: false,
        log_y: true,
        lines,
    });
    Ok(out)
}

pub fn ap_probe(c: &ExperimentConfig) -> Result<Outcome> {
    let (dim, n, factor) = (c.usize("dim")?, c.usize("n")?, c.f64("box_factor"));
    let radii = c.floats("radii")?;
    let ks = c.floats("k_values")?;
    let reports: Vec<_> = ks.par_iter().map(|&k| ap_failure_probe(k, &radii, dim, n, factor)).collect::<std::result::Result<_, _>>()?;
    let mut out = Outcome {
        rows: Table::new(&[
            "k",
            "radius",
            "box_length",
            "grid_n",
            "riesz_centered",
            "riesz_offset",
            "divergence_centered",
            "divergence_offset",
        ]),
        ..Outcome::default()
    };
    let (mut riesz_lines, mut div_lines) = (Vec::new(), Vec::new());
    for r in &reports {
        for row in &r.rows {
            out.rows.push(vec![
                num(r.k),
                num(row.radius),
                num(row.box_length),
                row.grid_n.to_string(),
                num(row.riesz_centered),
                num(row.riesz_offset),
                num(row.divergence_centered),
                num(row.divergence_offset),
            ]);
        }
        if r.k == 0.0 {
            let worst = max_of(
                r.rows.iter().flat_map(|x| [x.riesz_centered, x.riesz_offset, x.divergence_centered, x.divergence_offset]),
            );
            out.assert(
                "plancherel_k0",
                &format!("weighted_inequality: with k = 0 every probe ratio is at most 1 + {PLANCHEREL_SLACK:e}"),
                worst <= 1.0 + PLANCHEREL_SLACK,
                format!("largest ratio {worst:.15}"),
            );
        }
        out.metric(format!("riesz_offset_growth.k{}", r.k), r.riesz_offset_growth, Some(Check::Match));
        out.metric(format!("divergence_offset_growth.k{}", r.k), r.divergence_offset_growth, Some(Check::Match));
        riesz_lines.push(line(format!("k = {}", r.k), r.rows.iter().map(|x| (x.radius, x.riesz_offset)).collect()));
        div_lines.push(line(format!("k = {}", r.k), r.rows.iter().map(|x| (x.radius, x.divergence_offset)).collect()));
    }
    if !ks.contains(&0.0) {
        out.note("k = 0 not requested; the Plancherel check is skipped");
    }
    out.note("growth factors are reported, not thresholded: the plateau probe has no asserted rate");
    for (name, title, lines) in [
        ("riesz_offset_vs_radius", "plain Riesz ratio, offset plateau", riesz_lines),
        ("divergence_offset_vs_radius", "divergence-structure ratio, offset plateau", div_lines),
    ] {
        out.series.push(Series {
            name: name.into(),
            title: title.into(),
            x_label: "plateau radius R".into(),
            y_label: "weighted ratio".into(),
            log_x: true,
            log_y: true,
            lines,
        });
    }
    Ok(out)
}

/// Time profile of the bounded test function `u(x, t) = χ(t)`.
pub const BOUNDED_WINDOW: TemporalSupport = TemporalSupport { center: 0.06, halfwidth: 0.035, amplitude: 1.0 };

pub fn cutoff(c: &ExperimentConfig) -> Result<Outcome> {
    let grid = Grid::new(c.usize("dim")?, c.usize("n")?, c.f64("length"))?;
    let tg = TimeGrid::default_with_steps(c.usize("steps")?)?;
    let (a, k) = (c.f64("a"), c.f64("k"));
    let ms = c.floats("m_values")?;
    let u = SpaceTimeField::from_frames(grid, tg, |_, t| Ok(ScalarField::constant(grid, BOUNDED_WINDOW.value(t))))?;
    let mut out = Outcome {
        rows: Table::new(&["convention", "m", "lhs", "rhs", "ln_lhs", "ln_rhs", "lhs_step", "rhs_step"]),
        ..Outcome::default()
    };
    let mut lines = Vec::new();
    for conv in [SpatialExponent::DoubleK, SpatialExponent::SingleK] {
        let r = cutoff_convergence_study(&u, &WeightParams::new(a, k, conv)?, &ms)?;
        for (i, row) in r.rows.iter().enumerate() {
            let step = |s: &[f64]| if i == 0 { String::new() } else { num(s[i - 1]) };
            out.rows.push(vec![
                conv.label().into(),
                num(row.m),
                num(row.lhs),
                num(row.rhs),
                num(row.ln_lhs),
                num(row.ln_rhs),
                step(&r.lhs_steps),
                step(&r.rhs_steps),
            ]);
        }
        let label = conv.label();
        out.metric(format!("last_rhs_step.{label}"), *r.rhs_steps.last().expect("two radii"), Some(Check::Match));
        lines.push(line(format!("{label} lhs"), ms[1..].iter().copied().zip(r.lhs_steps.iter().copied()).collect()));
        lines.push(line(format!("{label} rhs"), ms[1..].iter().copied().zip(r.rhs_steps.iter().copied()).collect()));
        match conv {
            SpatialExponent::DoubleK => out.assert(
                "double_k_converged",
                &format!(
                    "weighted_inequality: both sides settle within {CUTOFF_CAUCHY_TOL} between the two largest cutoff radii"
                ),
                r.converged,
                format!("last steps lhs {:.3e}, rhs {:.3e}", r.lhs_steps.last().unwrap(), r.rhs_steps.last().unwrap()),
            ),
            SpatialExponent::SingleK => out.note(format!(
                "single_k reported without assertion: last steps lhs {:.3e}, rhs {:.3e}",
                r.lhs_steps.last().unwrap(),
                r.rhs_steps.last().unwrap()
            )),
        }
    }
    out.series.push(Series {
        name: "cutoff_steps".into(),
        title: format!("relative change per cutoff doubling, a = {a}, k = {k}"),
        x_label: "cutoff radius m".into(),
        y_label: "relative change".into(),
        log_x: true,
        log_y: true,
        lines,
    });
    Ok(out)
}
