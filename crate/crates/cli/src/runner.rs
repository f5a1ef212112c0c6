//! `run`, `freeze` and `plot`: everything that touches the output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::baseline::{prefix, Baseline};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiments::{execute, owning_module};
use crate::plot::render;
use crate::report::{write_artifact, Artifact, ExperimentReport, Outcome, Series};

/// Compares frozen metrics and appends one assertion per metric.
///
/// A configuration that was never frozen yields a single failed
/// `baseline_keys` assertion naming the missing keys.
pub fn compare_baseline(config: &ExperimentConfig, outcome: &mut Outcome, baseline: &Baseline) {
    let p = prefix(config.experiment.name(), &config.fingerprint());
    let module = owning_module(config.experiment);
    let frozen: Vec<_> = outcome.metrics.iter().filter_map(|m| m.frozen.map(|c| (m.clone(), c))).collect();
    let missing: Vec<String> =
        frozen.iter().map(|(m, _)| format!("{p}.{}", m.name)).filter(|k| !baseline.entries.contains_key(k)).collect();
    if !missing.is_empty() {
        let others = baseline.other_configs(config.experiment.name(), &p);
        let hint = if others.is_empty() {
            "no configuration of this experiment is frozen".to_string()
        } else {
            format!("frozen configurations: {}", others.join("; "))
        };
        outcome.assert(
            "baseline_keys",
            &format!("{module}: metrics are compared against the baseline of the same configuration"),
            false,
            format!("baseline-key mismatch, missing {}; {hint}", missing.join(", ")),
        );
        return;
    }
    for (m, check) in frozen {
        let key = format!("{p}.{}", m.name);
        let reference = baseline.entries[&key];
        outcome.assert(
            &format!("baseline:{}", m.name),
            &format!("{module}: {} {} its frozen value", m.name, match check {
                crate::baseline::Check::UpperBound => "does not exceed",
                crate::baseline::Check::Match => "reproduces",
            }),
            check.holds(m.value, reference),
            format!("{:e} against frozen {:e}", m.value, reference),
        );
    }
}

/// Renders every series into `dir`; skipped series come back as notes.
pub fn emit_plots(series: &[Series], dir: &Path) -> Result<(Vec<Artifact>, Vec<String>)> {
    let (mut artifacts, mut notes) = (Vec::new(), Vec::new());
    for s in series {
        match render(s)? {
            Ok(svg) => artifacts.push(write_artifact(dir, &format!("{}.svg", s.name), svg.as_bytes())?),
            Err(note) => notes.push(note),
        }
    }
    Ok((artifacts, notes))
}

pub struct RunOptions {
    pub out_dir: PathBuf,
    pub baseline: Option<PathBuf>,
}

/// Executes one experiment and writes `rows.csv`, extra tables and files,
/// SVG plots and finally `report.json` into the output directory.
///
/// Configuration and baseline problems surface before the directory is created.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentReport> {
    config.validate()?;
    let baseline = options.baseline.as_deref().map(Baseline::load).transpose()?;
    let start = Instant::now();
    let mut outcome = execute(config)?;
    if let Some(b) = &baseline {
        compare_baseline(config, &mut outcome, b);
    }
    let dir = &options.out_dir;
    std::fs::create_dir_all(dir)?;
    let mut artifacts = vec![write_artifact(dir, "rows.csv", &outcome.rows.to_csv()?)?];
    for (name, table) in &outcome.tables {
        artifacts.push(write_artifact(dir, name, &table.to_csv()?)?);
    }
    for (name, bytes) in &outcome.files {
        artifacts.push(write_artifact(dir, name, bytes)?);
    }
    let (svgs, notes) = emit_plots(&outcome.series, dir)?;
    artifacts.extend(svgs);
    outcome.notes.extend(notes);
    let passed = outcome.assertions.iter().all(|a| a.passed);
    let report = ExperimentReport {
        experiment: config.experiment.name().into(),
        seed: config.seed,
        fingerprint: config.fingerprint(),
        config: config.echo(),
        rows: outcome.rows,
        assertions: outcome.assertions,
        metrics: outcome.metrics,
        series: outcome.series,
        notes: outcome.notes,
        artifacts,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        passed,
    };
    std::fs::write(dir.join("report.json"), serde_json::to_vec_pretty(&report)?)?;
    Ok(report)
}

/// Runs without a baseline and records the frozen metrics of a fully passing run.
///
/// Keys already present in the baseline file are only replaced with `force`;
/// that check happens before the experiment runs.
pub fn freeze(config: &ExperimentConfig, out_dir: &Path, baseline_path: &Path, force: bool) -> Result<ExperimentReport> {
    config.validate()?;
    let mut baseline = if baseline_path.exists() { Baseline::load(baseline_path)? } else { Baseline::default() };
    let p = prefix(config.experiment.name(), &config.fingerprint());
    if !force {
        let existing: Vec<&String> = baseline.entries.keys().filter(|k| k.starts_with(&format!("{p}."))).collect();
        if !existing.is_empty() {
            return Err(CliError::BaselineExists {
                keys: existing.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", "),
            });
        }
    }
    let report = run(config, &RunOptions { out_dir: out_dir.to_path_buf(), baseline: None })?;
    if !report.passed {
        let failed: Vec<&str> = report.failed_assertions().iter().map(|a| a.name.as_str()).collect();
        return Err(CliError::FreezeFailing { failed: failed.join(", ") });
    }
    let values: Vec<(String, f64)> =
        report.metrics.iter().filter(|m| m.frozen.is_some()).map(|m| (m.name.clone(), m.value)).collect();
    baseline.merge(&p, &config.describe(), &values, force)?;
    baseline.save(baseline_path)?;
    Ok(report)
}

/// Re-renders the plots of a saved report.
pub fn plot(report_path: &Path, out_dir: &Path) -> Result<(Vec<Artifact>, Vec<String>)> {
    let report = ExperimentReport::load(report_path)?;
    std::fs::create_dir_all(out_dir)?;
    let (artifacts, mut notes) = emit_plots(&report.series, out_dir)?;
    if report.series.is_empty() {
        notes.push(format!("{}: report has no series, no SVG written", report.experiment));
    }
    Ok((artifacts, notes))
}
