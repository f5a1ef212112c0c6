use std::f64::consts::PI;

use carlemanlab_core::field::{Grid, VectorField};
use carlemanlab_core::nse::{
    axisymmetric_no_swirl, checkpoint_bytes, example_1_3_residual, localized_swirl, picard_iterate, separation_track, solve,
    CubicProfile, DiagnosticOptions, Example13Config, MildSolverConfig, Scheme, Trajectory, DEFAULT_ANGLES,
};

use super::{diagnostics_table, line, max_of, scheme, time_series};
use crate::baseline::Check;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::report::{num, Outcome, Series, Table};

pub const SHEAR_MAX_ERROR: f64 = 1e-6;
pub const RK2_MIN_ORDER: f64 = 1.9;
pub const RK4_MIN_ORDER: f64 = 3.7;
/// `E_{m+1} <= E_m (1 + ENERGY_REL_TOL)` on every unforced step.
pub const ENERGY_REL_TOL: f64 = 1e-12;
/// `‖∇·u‖ <= DIVERGENCE_TOL ‖u‖` on every step.
pub const DIVERGENCE_TOL: f64 = 1e-10;
pub const SWIRL_MAX: f64 = 1e-4;
/// Allowed growth of the rotation defect over its initial value.
pub const DEFECT_GROWTH_MAX: f64 = 5.0;
pub const EXAMPLE_RESIDUAL_MAX: f64 = 1e-12;

const ENERGY_INVARIANT: &str = "nse_lab: unforced energy is non-increasing step by step";
const DIVERGENCE_INVARIANT: &str = "nse_lab: the Leray-projected state stays divergence-free";

fn periodic_box(n: usize) -> Result<Grid> {
    Ok(Grid::new(3, n, 2.0 * PI)?)
}

fn taylor_green(grid: Grid, amplitude: f64) -> Result<VectorField> {
    Ok(VectorField::from_fn(grid, |x| {
        [
            amplitude * x[0].sin() * x[1].cos() * x[2].cos(),
            -amplitude * x[0].cos() * x[1].sin() * x[2].cos(),
            0.0,
        ]
    })?)
}

fn run(u0: &VectorField, dt: f64, t: f64, s: Scheme) -> Result<Trajectory> {
    Ok(solve(u0, &MildSolverConfig::new(dt, t)?.with_scheme(s), &DiagnosticOptions::default())?)
}

/// Steps where the energy grew, over all trajectories, as `label@step`.
fn energy_growth(runs: &[(&str, &Trajectory)]) -> Vec<String> {
    runs.iter().flat_map(|(label, tr)| tr.energy_increases(ENERGY_REL_TOL).into_iter().map(move |s| format!("{label}@{s}"))).collect()
}

fn completed(out: &mut Outcome, name: &str, tr: &Trajectory) {
    out.assert(
        name,
        "nse_lab: the integrator reaches the final time without a CFL or finiteness abort",
        tr.completed(),
        match &tr.abort {
            Some(a) => format!("aborted at step {} (t = {}): {}", a.step, a.t, a.reason),
            None => format!("{} steps", tr.diagnostics.len() - 1),
        },
    );
}

pub fn shear(c: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let grid = periodic_box(c.usize("n")?)?;
    let u0 = VectorField::from_fn(grid, |x| [x[1].sin(), 0.0, 0.0])?;
    let total = c.f64("total_time");
    let tr = run(&u0, c.f64("dt"), total, Scheme::IntegratingFactorRk2)?;
    completed(&mut out, "shear_completed", &tr);
    let err = tr.final_state().sub(&u0.scaled((-total).exp()))?.max_magnitude();
    out.assert(
        "shear_exact",
        &format!("nse_lab: the shear flow (sin x2, 0, 0) decays as e^(-t) to within {SHEAR_MAX_ERROR:e}"),
        err <= SHEAR_MAX_ERROR,
        format!("max error {err:.3e} at t = {}", tr.final_time()),
    );
    out.metric("shear_max_error", err, None);
    out.rows = diagnostics_table(&tr.diagnostics);

    let og = periodic_box(c.usize("order_n")?)?;
    let tg0 = taylor_green(og, c.f64("order_amplitude"))?;
    let t_end = c.f64("order_time");
    let steps = c.usizes("order_steps")?;
    if steps.len() < 2 || steps.windows(2).any(|w| w[1] <= w[0]) || steps.contains(&0) {
        return Err(CliError::config("order_steps", "need at least two increasing positive step counts"));
    }
    let reference_steps = c.usize("reference_steps")?;
    if reference_steps <= *steps.last().expect("non-empty") {
        return Err(CliError::config("reference_steps", "must exceed every entry of order_steps"));
    }
    let mut orders_table = Table::new(&["scheme", "steps", "dt", "max_error", "order"]);
    let mut error_lines = Vec::new();
    let mut trajectories = Vec::new();
    for (s, min_order) in [(Scheme::IntegratingFactorRk2, RK2_MIN_ORDER), (Scheme::IntegratingFactorRk4, RK4_MIN_ORDER)] {
        let reference = run(&tg0, t_end / reference_steps as f64, t_end, s)?;
        let mut errs = Vec::new();
        for &m in &steps {
            let dt = t_end / m as f64;
            let tr = run(&tg0, dt, t_end, s)?;
            errs.push((dt, tr.final_state().sub(reference.final_state())?.max_magnitude()));
            trajectories.push((format!("{}-{m}", s.label()), tr));
        }
        trajectories.push((format!("{}-reference", s.label()), reference));
        let orders: Vec<f64> = errs.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect();
        for (i, (dt, e)) in errs.iter().enumerate() {
            let o = if i == 0 { String::new() } else { num(orders[i - 1]) };
            orders_table.push(vec![s.label().into(), steps[i].to_string(), num(*dt), num(*e), o]);
        }
        let worst = orders.iter().copied().fold(f64::INFINITY, f64::min);
        let tag = if s.order() == 2 { "rk2" } else { "rk4" };
        out.assert(
            &format!("order_{tag}"),
            &format!("nse_lab: step halving converges at order ≥ {min_order} for {}", s.label()),
            worst >= min_order,
            format!("orders {orders:.3?}"),
        );
        out.metric(format!("min_order.{tag}"), worst, None);
        error_lines.push(line(s.label(), errs));
    }
    out.tables.push(("orders.csv".into(), orders_table));

    let pg = periodic_box(c.usize("picard_n")?)?;
    let pu0 = taylor_green(pg, c.f64("picard_amplitude"))?;
    let pc = MildSolverConfig::new(c.f64("picard_dt"), c.f64("picard_horizon"))?;
    let picard = picard_iterate(&pu0, c.f64("picard_horizon"), c.usize("picard_iterations")?, &pc)?;
    let factor = picard.contraction().map(|k| k.factor);
    let decreasing = picard.distances.windows(2).all(|w| w[1] < w[0] || w[1] == 0.0);
    out.assert(
        "picard_contracts",
        "nse_lab: successive Picard iterate distances contract geometrically on a short horizon",
        decreasing && factor.is_some_and(|f| f < 1.0),
        format!("distances {}", picard.distances.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", ")),
    );
    if let Some(f) = factor {
        out.metric("picard_factor", f, Some(Check::Match));
    }
    let mut picard_table = Table::new(&["iteration", "distance"]);
    for (i, d) in picard.distances.iter().enumerate() {
        picard_table.push(vec![(i + 1).to_string(), num(*d)]);
    }
    out.tables.push(("picard.csv".into(), picard_table));

    let mut runs: Vec<(&str, &Trajectory)> = vec![("shear", &tr)];
    runs.extend(trajectories.iter().map(|(l, t)| (l.as_str(), t)));
    let grown = energy_growth(&runs);
    out.assert(
        "energy_monotone",
        ENERGY_INVARIANT,
        grown.is_empty(),
        if grown.is_empty() { format!("{} trajectories", runs.len()) } else { format!("energy grew at {}", grown.join(", ")) },
    );
    let div = max_of(runs.iter().map(|(_, t)| t.max_relative_divergence()));
    out.assert("divergence_free", DIVERGENCE_INVARIANT, div <= DIVERGENCE_TOL, format!("largest ‖∇·u‖/‖u‖ {div:.3e}"));

    out.series.push(time_series(
        "shear_energy_vs_t",
        "shear flow energy",
        "energy",
        true,
        vec![line("energy", tr.diagnostics.iter().map(|d| (d.t, d.energy)).collect())],
    ));
    out.series.push(Series {
        name: "error_vs_dt".into(),
        title: "step-halving error against the reference run".into(),
        x_label: "dt".into(),
        y_label: "max error".into(),
        log_x: true,
        log_y: true,
        lines: error_lines,
    });
    out.series.push(Series {
        name: "picard_distances".into(),
        title: "distance between successive Picard iterates".into(),
        x_label: "iteration".into(),
        y_label: "sup_t ‖u^(n+1) - u^n‖".into(),
        log_x: false,
        log_y: true,
        lines: vec![line("distance", picard.distances.iter().enumerate().map(|(i, d)| ((i + 1) as f64, *d)).collect())],
    });
    Ok(out)
}

pub fn axisym(c: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let grid = Grid::new(3, c.usize("n")?, c.f64("length"))?;
    let u0 = axisymmetric_no_swirl(grid, c.f64("amplitude"), c.f64("width"))?;
    let s = scheme(c)?;
    let config = MildSolverConfig::new(c.f64("dt"), c.f64("total_time"))?.with_scheme(s).with_store_every(c.usize("store_every")?);
    let tr = solve(&u0, &config, &DiagnosticOptions::axisymmetric(&DEFAULT_ANGLES))?;
    completed(&mut out, "completed", &tr);
    let swirl = max_of(tr.diagnostics.iter().map(|d| d.swirl_fraction.expect("requested")));
    let d0 = tr.diagnostics[0].symmetry_defect.expect("requested");
    let defect = max_of(tr.diagnostics.iter().map(|d| d.symmetry_defect.expect("requested")));
    out.assert(
        "swirl_free",
        &format!("nse_lab: swirl-free axisymmetric data keeps swirl_fraction ≤ {SWIRL_MAX:e}"),
        swirl <= SWIRL_MAX,
        format!("largest swirl fraction {swirl:.3e}"),
    );
    out.assert(
        "symmetry_kept",
        &format!("nse_lab: symmetry_defect(t) ≤ {DEFECT_GROWTH_MAX}·symmetry_defect(0)"),
        defect <= DEFECT_GROWTH_MAX * d0,
        format!("largest defect {defect:.4e}, initial {d0:.4e}"),
    );
    let grown = energy_growth(&[("axisym", &tr)]);
    out.assert("energy_monotone", ENERGY_INVARIANT, grown.is_empty(), format!("{} growing steps", grown.len()));
    let div = tr.max_relative_divergence();
    out.assert("divergence_free", DIVERGENCE_INVARIANT, div <= DIVERGENCE_TOL, format!("largest ‖∇·u‖/‖u‖ {div:.3e}"));
    out.metric("max_swirl_fraction", swirl, None);
    out.metric("defect_growth", defect / d0, None);
    out.metric("final_energy", tr.diagnostics.last().expect("initial row").energy, Some(Check::Match));
    let boundary = max_of(tr.diagnostics.iter().map(|d| d.boundary_energy_fraction));
    out.metric("max_boundary_energy_fraction", boundary, None);
    out.note(format!("largest energy share near the box boundary {boundary:.3e}"));

    let (bin, json) = checkpoint_bytes(&tr, s.label(), config.dealias)?;
    out.files.push(("trajectory.bin".into(), bin));
    out.files.push(("trajectory.json".into(), json));
    out.rows = diagnostics_table(&tr.diagnostics);
    let pts = |f: fn(&carlemanlab_core::nse::Diagnostics) -> f64| tr.diagnostics.iter().map(|d| (d.t, f(d))).collect();
    out.series.push(time_series("energy_vs_t", "energy and enstrophy", "value", true, vec![
        line("energy", pts(|d| d.energy)),
        line("enstrophy", pts(|d| d.enstrophy)),
    ]));
    out.series.push(time_series("swirl_vs_t", "swirl fraction", "swirl_fraction", false, vec![line(
        "swirl_fraction",
        pts(|d| d.swirl_fraction.unwrap_or(0.0)),
    )]));
    out.series.push(time_series("symmetry_defect_vs_t", "rotation defect", "symmetry_defect", false, vec![line(
        "symmetry_defect",
        pts(|d| d.symmetry_defect.unwrap_or(0.0)),
    )]));
    Ok(out)
}

pub fn separation(c: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let grid = Grid::new(3, c.usize("n")?, c.f64("length"))?;
    let u1 = axisymmetric_no_swirl(grid, c.f64("amplitude"), c.f64("width"))?;
    let center = c.floats("perturbation_center")?;
    let center: [f64; 3] = center
        .try_into()
        .map_err(|v: Vec<f64>| CliError::config("perturbation_center", format!("needs 3 coordinates, got {}", v.len())))?;
    let u2 = u1.add(&localized_swirl(grid, center, c.f64("perturbation_radius"), c.f64("perturbation"))?)?;
    let config = MildSolverConfig::new(c.f64("dt"), c.f64("total_time"))?.with_scheme(scheme(c)?);
    let k = c.f64("k");
    let same = separation_track(&u1, &u1, &config, k)?;
    let diff = separation_track(&u1, &u2, &config, k)?;
    let swapped = separation_track(&u2, &u1, &config, k)?;
    out.assert(
        "identical_zero",
        "nse_lab: identical initial data give an identically zero weighted distance",
        same.identically_zero() && !same.truncated,
        format!("largest distance {:e}", max_of(same.distances.iter().copied())),
    );
    let last = diff.final_distance();
    out.assert(
        "perturbed_positive",
        "nse_lab: distinct initial data keep a strictly positive weighted distance",
        last > 0.0 && !diff.truncated,
        match &diff.abort_reason {
            Some(r) => format!("stopped early: {r}"),
            None => format!("final distance {last:e}"),
        },
    );
    out.assert(
        "symmetric",
        "nse_lab: the weighted distance does not depend on the order of the two runs",
        diff == swapped,
        "bitwise comparison of both orders",
    );
    out.metric("final_distance", last, Some(Check::Match));
    let mut rows = Table::new(&["step", "t", "distance_identical", "distance_perturbed"]);
    for (i, (t, d)) in diff.times.iter().zip(&diff.distances).enumerate() {
        rows.push(vec![i.to_string(), num(*t), same.distances.get(i).map(|x| num(*x)).unwrap_or_default(), num(*d)]);
    }
    out.rows = rows;
    out.series.push(time_series("distance_vs_t", &format!("weighted distance, k = {k}"), "distance", true, vec![line(
        "perturbed",
        diff.times.iter().copied().zip(diff.distances.iter().copied()).collect(),
    )]));
    Ok(out)
}

pub fn example(c: &ExperimentConfig) -> Result<Outcome> {
    let seed = c.require_seed()?;
    let profile = CubicProfile::new(c.f64("t_final"))?;
    let config = Example13Config {
        profile,
        samples: c.usize("samples")?,
        extent: c.f64("extent"),
        pressure_scale: c.f64("pressure_scale"),
        seed,
    };
    let r = example_1_3_residual(&config)?;
    let mut out = Outcome {
        rows: Table::new(&["samples", "max_residual", "max_abs_h_prime", "final_speed", "nonzero_before_final", "earliest_nonzero"]),
        ..Outcome::default()
    };
    out.rows.push(vec![
        r.samples.to_string(),
        num(r.max_residual),
        num(r.max_abs_h_prime),
        num(r.final_speed),
        r.nonzero_before_final.to_string(),
        num(r.earliest_nonzero),
    ]);
    out.assert(
        "residual",
        &format!("nse_lab: the closed-form flow solves the equations to within {EXAMPLE_RESIDUAL_MAX:e} at every sample"),
        r.max_residual <= EXAMPLE_RESIDUAL_MAX,
        format!("max residual {:e} over {} samples", r.max_residual, r.samples),
    );
    out.assert(
        "stops_at_final_time",
        "nse_lab: u(T) = 0 while u is not identically zero before T",
        r.final_speed == 0.0 && r.nonzero_before_final,
        format!("|u(T)| = {:e}, first nonzero time {}", r.final_speed, r.earliest_nonzero),
    );
    out.metric("max_residual", r.max_residual, None);
    let t_final = profile.t_final;
    let mut table = Table::new(&["t", "h", "h_prime"]);
    let mut pts = Vec::new();
    for i in 0..=200 {
        let t = t_final * i as f64 / 200.0;
        table.push(vec![num(t), num(profile.h(t)), num(profile.h_prime(t))]);
        pts.push((t, profile.h(t)));
    }
    out.tables.push(("profile.csv".into(), table));
    out.series.push(time_series("profile", "speed h(t) of the constant flow", "h", false, vec![line("h", pts)]));
    Ok(out)
}
