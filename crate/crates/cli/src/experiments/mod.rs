//! One function per experiment: config in, [`Outcome`] out, nothing written.
//!
//! Tolerances live here as constants rather than config keys, so a config can
//! change what is computed but never how strictly it is judged.

mod commutator;
mod flow;
mod weighted;

use carlemanlab_core::field::SpatialExponent;
use carlemanlab_core::nse::{Diagnostics, Scheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::report::{Line, Outcome, Series, Table};

pub use commutator::COMMUTATOR_MIN_ORDER;
pub use flow::{ENERGY_REL_TOL, RK2_MIN_ORDER, RK4_MIN_ORDER, SHEAR_MAX_ERROR};
pub use weighted::{PLANCHEREL_SLACK, REFINEMENT_TOL};

pub fn execute(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    match config.experiment {
        Experiment::VerifyMatrixLemma => commutator::matrix_lemma(config),
        Experiment::VerifyCommutator => commutator::bracket(config),
        Experiment::VerifyWeighted => weighted::sweep(config),
        Experiment::VerifyCz => weighted::cz(config),
        Experiment::ApProbe => weighted::ap_probe(config),
        Experiment::CutoffStudy => weighted::cutoff(config),
        Experiment::NseShear => flow::shear(config),
        Experiment::NseAxisym => flow::axisym(config),
        Experiment::NseSeparation => flow::separation(config),
        Experiment::Example13 => flow::example(config),
    }
}

/// Module whose invariants an experiment checks.
pub fn owning_module(experiment: Experiment) -> &'static str {
    match experiment {
        Experiment::VerifyMatrixLemma | Experiment::VerifyCommutator => "commutator_lab",
        Experiment::VerifyWeighted | Experiment::VerifyCz | Experiment::ApProbe | Experiment::CutoffStudy => {
            "weighted_inequality"
        }
        Experiment::NseShear | Experiment::NseAxisym | Experiment::NseSeparation | Experiment::Example13 => "nse_lab",
    }
}

/// `count` seeds drawn from one stream, so each case is reproducible on its own.
fn sub_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random()).collect()
}

fn scheme(config: &ExperimentConfig) -> Result<Scheme> {
    match config.text("scheme") {
        "rk2" => Ok(Scheme::IntegratingFactorRk2),
        "rk4" => Ok(Scheme::IntegratingFactorRk4),
        other => Err(CliError::config("scheme", format!("expected rk2 or rk4, got `{other}`"))),
    }
}

fn convention(config: &ExperimentConfig) -> Result<SpatialExponent> {
    match config.text("convention") {
        "single_k" => Ok(SpatialExponent::SingleK),
        "double_k" => Ok(SpatialExponent::DoubleK),
        other => Err(CliError::config("convention", format!("expected single_k or double_k, got `{other}`"))),
    }
}

fn diagnostics_table(diags: &[Diagnostics]) -> Table {
    let mut t = Table::new(&Diagnostics::CSV_HEADER);
    for d in diags {
        t.push(d.csv_record());
    }
    t
}

fn time_series(name: &str, title: &str, y_label: &str, log_y: bool, lines: Vec<Line>) -> Series {
    Series {
        name: name.into(),
        title: title.into(),
        x_label: "t".into(),
        y_label: y_label.into(),
        log_x: false,
        log_y,
        lines,
    }
}

fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Line {
    Line { label: label.into(), points }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}
