//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Experiments run from the checked-in `configs/` against `baselines/default.txt`;
//! each heavy run happens once and is shared by the criteria that read it.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use carlemanlab::baseline::{MATCH_TOLERANCE, UPPER_BOUND_SLACK};
use carlemanlab::experiments::{
    COMMUTATOR_MIN_ORDER, ENERGY_REL_TOL, PLANCHEREL_SLACK, REFINEMENT_TOL, RK2_MIN_ORDER, RK4_MIN_ORDER, SHEAR_MAX_ERROR,
};
use carlemanlab::runner::{run, RunOptions};
use carlemanlab::{Experiment, ExperimentConfig, ExperimentReport};
use carlemanlab_core::commutator::lemma::LEMMA_TOLERANCE;
use carlemanlab_core::field::{Grid, ScalarField, VectorField};
use carlemanlab_core::spectral::{divergence, heat, leray, random_smooth_field, random_smooth_vector, riesz_second};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

struct Suite {
    root: PathBuf,
    scratch: tempfile::TempDir,
    runs: RefCell<BTreeMap<&'static str, ExperimentReport>>,
}

impl Suite {
    fn config(&self, e: Experiment) -> Result<ExperimentConfig, String> {
        ExperimentConfig::load(&self.root.join("configs").join(format!("{}.toml", e.name()))).map_err(|x| x.to_string())
    }

    fn baseline(&self) -> PathBuf {
        self.root.join("baselines/default.txt")
    }

    fn execute(&self, config: &ExperimentConfig, dir: &str, baseline: bool) -> Result<ExperimentReport, String> {
        let out_dir = self.scratch.path().join(dir);
        let baseline = baseline.then(|| self.baseline());
        run(config, &RunOptions { out_dir, baseline }).map_err(|x| format!("run failed: {x}"))
    }

    /// The checked-in configuration, compared against the frozen baseline; cached.
    fn report(&self, e: Experiment) -> Result<ExperimentReport, String> {
        if let Some(r) = self.runs.borrow().get(e.name()) {
            return Ok(r.clone());
        }
        let r = self.execute(&self.config(e)?, e.name(), true)?;
        self.runs.borrow_mut().insert(e.name(), r.clone());
        Ok(r)
    }
}

fn need(report: &ExperimentReport, names: &[&str]) -> Result<Vec<String>, String> {
    names
        .iter()
        .map(|n| match report.assertion(n) {
            Some(a) if a.passed => Ok(format!("{n}: {}", a.detail)),
            Some(a) => Err(format!("{n} failed: {}", a.detail)),
            None => Err(format!("{n} missing from the {} report", report.experiment)),
        })
        .collect()
}

/// Every assertion of the run, including its baseline comparisons, passed.
fn all_pass(report: &ExperimentReport) -> Result<(), String> {
    let failed = report.failed_assertions();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(failed.iter().map(|a| format!("{}: {}", a.name, a.detail)).collect::<Vec<_>>().join("; "))
    }
}

fn within(report: &ExperimentReport, limit: f64) -> Result<(), String> {
    if report.wall_clock_seconds < limit {
        Ok(())
    } else {
        Err(format!("{} took {:.1} s, limit {limit} s", report.experiment, report.wall_clock_seconds))
    }
}

fn pinned(what: &str, actual: f64, expected: f64) -> Result<(), String> {
    if actual == expected {
        Ok(())
    } else {
        Err(format!("{what} is {actual:e}, expected {expected:e}"))
    }
}

fn key(config: &ExperimentConfig, name: &str) -> serde_json::Value {
    config.echo()["params"][name].clone()
}

fn expect_key(config: &ExperimentConfig, name: &str, expected: serde_json::Value) -> Result<(), String> {
    let got = key(config, name);
    if got == expected {
        Ok(())
    } else {
        Err(format!("config {name} = {got}, expected {expected}"))
    }
}

fn c1_matrix_lemma(s: &Suite) -> Verdict {
    pinned("lemma tolerance", LEMMA_TOLERANCE, 1e-9)?;
    let c = s.config(Experiment::VerifyMatrixLemma)?;
    expect_key(&c, "matrices", 1000.into())?;
    expect_key(&c, "vectors", 100.into())?;
    expect_key(&c, "min_dim", 2.into())?;
    expect_key(&c, "max_dim", 16.into())?;
    let r = s.report(Experiment::VerifyMatrixLemma)?;
    need(&r, &["lemma_dense", "lemma_symmetric", "lemma_skew", "lemma_nilpotent"])?;
    all_pass(&r)?;
    within(&r, 10.0)?;
    Ok(format!("4 classes, 400000 checks, {:.1} s", r.wall_clock_seconds))
}

fn c2_commutator(s: &Suite) -> Verdict {
    pinned("order threshold", COMMUTATOR_MIN_ORDER, 1.9)?;
    let c = s.config(Experiment::VerifyCommutator)?;
    expect_key(&c, "bumps", 20.into())?;
    expect_key(&c, "n", 48.into())?;
    expect_key(&c, "steps", 64.into())?;
    let r = s.report(Experiment::VerifyCommutator)?;
    let mut orders = Vec::new();
    for d in [2, 3] {
        for k in [0, 1, 2] {
            let o = r.metric(&format!("order.n{d}.k{k}")).ok_or(format!("no order for n = {d}, k = {k}"))?;
            if !(o >= COMMUTATOR_MIN_ORDER) {
                return Err(format!("order {o:.3} at n = {d}, k = {k}"));
            }
            orders.push(format!("{o:.2}"));
        }
    }
    need(&r, &["discrepancies_finite"])?;
    all_pass(&r)?;
    within(&r, 600.0)?;
    Ok(format!("orders [{}], {:.0} s", orders.join(", "), r.wall_clock_seconds))
}

fn c3_weighted(s: &Suite) -> Verdict {
    pinned("upper-bound slack", UPPER_BOUND_SLACK, 1e-12)?;
    let c = s.config(Experiment::VerifyWeighted)?;
    expect_key(&c, "a_values", serde_json::json!([10.0, 100.0, 1000.0, 10000.0]))?;
    expect_key(&c, "k_values", serde_json::json!([2.0]))?;
    let r = s.report(Experiment::VerifyWeighted)?;
    need(&r, &["ratios_finite_k2", "lhs_monotone_k2", "baseline:c_emp.k2.standard"])?;
    let col = |name: &str| r.rows.header.iter().position(|h| h == name).ok_or(format!("no {name} column"));
    let (a, log) = (col("a")?, col("log_domain")?);
    for row in &r.rows.rows {
        let big = row[a].parse::<f64>().map_err(|e| e.to_string())? > 200.0;
        if big && row[log] != "true" {
            return Err(format!("a = {} evaluated outside the log domain", row[a]));
        }
    }
    all_pass(&r)?;
    within(&r, 900.0)?;
    Ok(format!(
        "{} rows, C_emp {:e}, {:.0} s",
        r.rows.rows.len(),
        r.metric("c_emp.k2.standard").unwrap_or(f64::NAN),
        r.wall_clock_seconds
    ))
}

fn c4_cz(s: &Suite) -> Verdict {
    pinned("Plancherel slack", PLANCHEREL_SLACK, 1e-10)?;
    pinned("refinement tolerance", REFINEMENT_TOL, 0.1)?;
    let c = s.config(Experiment::VerifyCz)?;
    expect_key(&c, "n", 48.into())?;
    expect_key(&c, "fine_n", 96.into())?;
    expect_key(&c, "k_values", serde_json::json!([0.0, 1.0, 2.0, 2.4]))?;
    let r = s.report(Experiment::VerifyCz)?;
    let mut names = vec!["ratios_finite".to_string(), "plancherel_k0".into(), "refinement".into()];
    names.extend(["0", "1", "2", "2.4"].map(|k| format!("baseline:max_ratio.k{k}")));
    let lines = need(&r, &names.iter().map(String::as_str).collect::<Vec<_>>())?;
    all_pass(&r)?;
    within(&r, 600.0)?;
    Ok(format!("{}; {}; {:.0} s", lines[1], lines[2], r.wall_clock_seconds))
}

/// Worst relative defect of each identity over 50 seeded fields in 2D and 3D.
fn c5_operators(_: &Suite) -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut idem, mut div, mut semi, mut trace) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let rel = |a: f64, b: f64| if b > 0.0 { a / b } else { a };
    for i in 0..50 {
        let grid = if i % 2 == 0 { Grid::new(3, 16, 6.0) } else { Grid::new(2, 32, 2.0 * std::f64::consts::PI) }
            .map_err(|e| e.to_string())?;
        let width = 2.0 + (i % 5) as f64;
        let u: VectorField = random_smooth_vector(grid, &mut rng, width);
        let pu = leray(&u);
        idem = idem.max(rel(leray(&pu).sub(&pu).map_err(|e| e.to_string())?.max_magnitude(), pu.max_magnitude()));
        div = div.max(rel(divergence(&pu).l2_norm(), u.l2_norm()));

        let f: ScalarField = random_smooth_field(grid, &mut rng, width);
        let (t, tau) = (0.01 * (1 + i % 7) as f64, 0.03);
        let composed = heat(&heat(&f, t).map_err(|e| e.to_string())?, tau).map_err(|e| e.to_string())?;
        let direct = heat(&f, t + tau).map_err(|e| e.to_string())?;
        semi = semi.max(rel(composed.sub(&direct).map_err(|e| e.to_string())?.max_abs(), f.max_abs()));

        let mut sum = ScalarField::zeros(grid);
        for axis in 0..grid.dim() {
            sum = sum.add(&riesz_second(axis, axis, &f).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        }
        let centered = f.map(|v| v - f.mean()).map_err(|e| e.to_string())?;
        trace = trace.max(rel(sum.sub(&centered).map_err(|e| e.to_string())?.max_abs(), f.max_abs()));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let checks = [("idempotence", idem, 1e-12), ("divergence", div, 1e-10), ("semigroup", semi, 1e-12), ("trace", trace, 1e-12)];
    let detail = checks.iter().map(|(n, v, _)| format!("{n} {v:.1e}")).collect::<Vec<_>>().join(", ");
    if let Some((n, v, tol)) = checks.iter().find(|(_, v, tol)| !(v <= tol)) {
        return Err(format!("{n} defect {v:e} above {tol:e} ({detail})"));
    }
    if elapsed >= 60.0 {
        return Err(format!("{elapsed:.1} s, limit 60 s"));
    }
    Ok(format!("{detail} over 50 fields, {elapsed:.1} s"))
}

fn c6_shear(s: &Suite) -> Verdict {
    pinned("shear error bound", SHEAR_MAX_ERROR, 1e-6)?;
    pinned("RK2 order", RK2_MIN_ORDER, 1.9)?;
    pinned("RK4 order", RK4_MIN_ORDER, 3.7)?;
    let c = s.config(Experiment::NseShear)?;
    expect_key(&c, "n", 32.into())?;
    expect_key(&c, "dt", 1e-3.into())?;
    expect_key(&c, "total_time", 1.0.into())?;
    let r = s.report(Experiment::NseShear)?;
    let lines = need(&r, &["shear_exact", "order_rk2", "order_rk4"])?;
    all_pass(&r)?;
    within(&r, 120.0)?;
    Ok(format!("{}; {:.0} s", lines.join("; "), r.wall_clock_seconds))
}

fn c7_energy(s: &Suite) -> Verdict {
    pinned("energy tolerance", ENERGY_REL_TOL, 1e-12)?;
    let mut lines = Vec::new();
    for e in [Experiment::NseShear, Experiment::NseAxisym] {
        let r = s.report(e)?;
        lines.extend(need(&r, &["energy_monotone"])?.into_iter().map(|l| format!("{}: {l}", e.name())));
    }
    Ok(lines.join("; "))
}

fn c8_axisym(s: &Suite) -> Verdict {
    let c = s.config(Experiment::NseAxisym)?;
    expect_key(&c, "n", 48.into())?;
    expect_key(&c, "total_time", 0.5.into())?;
    let r = s.report(Experiment::NseAxisym)?;
    let lines = need(&r, &["swirl_free", "symmetry_kept"])?;
    all_pass(&r)?;
    within(&r, 600.0)?;
    Ok(format!("{}; {:.0} s", lines.join("; "), r.wall_clock_seconds))
}

fn c9_example(s: &Suite) -> Verdict {
    let c = s.config(Experiment::Example13)?;
    expect_key(&c, "samples", 10000.into())?;
    let r = s.report(Experiment::Example13)?;
    let lines = need(&r, &["residual", "stops_at_final_time"])?;
    all_pass(&r)?;
    within(&r, 1.0)?;
    Ok(lines.join("; "))
}

fn c10_separation(s: &Suite) -> Verdict {
    pinned("match tolerance", MATCH_TOLERANCE, 1e-10)?;
    let r = s.report(Experiment::NseSeparation)?;
    need(&r, &["identical_zero", "perturbed_positive", "symmetric", "baseline:final_distance"])?;
    all_pass(&r)?;
    within(&r, 300.0)?;
    let again = s.execute(&s.config(Experiment::NseSeparation)?, "nse-separation-rerun", true)?;
    all_pass(&again)?;
    let (a, b) = (r.metric("final_distance"), again.metric("final_distance"));
    if a.map(f64::to_bits) != b.map(f64::to_bits) {
        return Err(format!("rerun changed the final distance: {a:?} then {b:?}"));
    }
    Ok(format!("final distance {:e} reproduced bitwise and within the baseline", a.unwrap_or(f64::NAN)))
}

fn csv_bytes(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let p = entry.map_err(|e| e.to_string())?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// Reruns the cheap checked-in configs, plus reduced versions of the heavy ones,
/// and compares every CSV file byte for byte.
fn c11_determinism(s: &Suite) -> Verdict {
    let mut cases: Vec<(String, ExperimentConfig)> = Vec::new();
    for e in [
        Experiment::VerifyMatrixLemma,
        Experiment::ApProbe,
        Experiment::NseShear,
        Experiment::NseAxisym,
        Experiment::NseSeparation,
        Experiment::Example13,
        Experiment::CutoffStudy,
    ] {
        cases.push((e.name().into(), s.config(e)?));
    }
    let reduced: [(Experiment, &[(&str, toml::Value)]); 3] = [
        (Experiment::VerifyCommutator, &[("n", 12.into()), ("steps", 16.into()), ("bumps", 3.into())]),
        (Experiment::VerifyWeighted, &[("dim", 2.into()), ("n", 16.into()), ("steps", 16.into())]),
        (Experiment::VerifyCz, &[("n", 16.into()), ("fine_n", 24.into()), ("members", 2.into())]),
    ];
    for (e, overrides) in reduced {
        let mut c = s.config(e)?;
        for (k, v) in overrides {
            c.set(k, v.clone()).map_err(|x| x.to_string())?;
        }
        cases.push((format!("{}-reduced", e.name()), c));
    }
    let mut files = 0;
    for (label, c) in &cases {
        let a = s.execute(c, &format!("det-{label}-a"), false)?;
        let b = s.execute(c, &format!("det-{label}-b"), false)?;
        let (ca, cb) = (csv_bytes(&s.scratch.path().join(format!("det-{label}-a")))?, csv_bytes(&s.scratch.path().join(format!("det-{label}-b")))?);
        if ca.is_empty() || ca != cb {
            let differing: Vec<&String> = ca.keys().filter(|k| ca.get(*k) != cb.get(*k)).collect();
            return Err(format!("{label}: CSV output differs between runs ({differing:?})"));
        }
        if a.rows != b.rows {
            return Err(format!("{label}: report rows differ between runs"));
        }
        files += ca.len();
    }
    Ok(format!("{} configurations, {files} CSV files identical across reruns", cases.len()))
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().expect("workspace root");
    let suite = Suite { root, scratch: tempfile::tempdir().expect("scratch dir"), runs: RefCell::new(BTreeMap::new()) };
    let criteria: [(&str, fn(&Suite) -> Verdict); 11] = [
        ("matrix commutator lemma", c1_matrix_lemma),
        ("direct and explicit commutator agree with order >= 1.9", c2_commutator),
        ("weighted estimate sweep over a", c3_weighted),
        ("divergence-structure estimate", c4_cz),
        ("operator identities", c5_operators),
        ("mild solver exactness and order", c6_shear),
        ("unforced energy dissipation", c7_energy),
        ("axisymmetry preservation", c8_axisym),
        ("finite-time stopping example", c9_example),
        ("separation consistency", c10_separation),
        ("determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check(&suite);
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS criterion {}: {title} ({detail}) [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {title} ({detail}) [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
