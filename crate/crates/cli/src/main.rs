use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use carlemanlab::runner::{self, RunOptions};
use carlemanlab::{CliError, Experiment, ExperimentConfig, ExperimentReport, THREADS_ENV};

#[derive(Parser)]
#[command(name = "carlemanlab", version, about = "Carleman-estimate verification experiments")]
struct Cli {
    /// Worker threads for parallel sweeps; defaults to all cores.
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML file naming the experiment and its parameters.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's out_dir or out/<experiment>.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its artifacts.
    Run {
        #[command(flatten)]
        common: Common,
        /// Compare frozen metrics against this baseline file.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Run one experiment and record its metrics in a baseline file.
    Freeze {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "baselines/default.txt")]
        baseline: PathBuf,
        /// Replace keys that are already frozen.
        #[arg(long)]
        force: bool,
    },
    /// Re-render the SVG plots of a saved report.json.
    Plot {
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List experiments with their keys and defaults.
    ListExperiments,
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let mut config = ExperimentConfig::load(&common.config)?;
    if common.seed.is_some() {
        config.seed = common.seed;
    }
    let out = common.out.clone().or_else(|| config.out_dir.clone()).unwrap_or_else(|| config.default_out_dir());
    Ok((config, out))
}

fn summarize(report: &ExperimentReport, out: &std::path::Path) {
    for a in &report.assertions {
        println!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    for n in &report.notes {
        println!("note: {n}");
    }
    println!(
        "{} {} in {:.1}s, artifacts in {}",
        report.experiment,
        if report.passed { "passed" } else { "FAILED" },
        report.wall_clock_seconds,
        out.display()
    );
}

fn list() {
    for e in Experiment::ALL {
        let seed = if e.randomized() { " (requires seed)" } else { "" };
        println!("{}{seed}\n  {}", e.name(), e.summary());
        for k in e.keys() {
            println!("    {} = {}  # {}", k.name, k.default, k.doc);
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run { common, baseline } => {
            let (config, out) = load(&common)?;
            let report = runner::run(&config, &RunOptions { out_dir: out.clone(), baseline })?;
            summarize(&report, &out);
            Ok(report.passed)
        }
        Command::Freeze { common, baseline, force } => {
            let (config, out) = load(&common)?;
            let report = runner::freeze(&config, &out, &baseline, force)?;
            summarize(&report, &out);
            println!("frozen into {}", baseline.display());
            Ok(true)
        }
        Command::Plot { report, out } => {
            let out = out.unwrap_or_else(|| report.parent().map(PathBuf::from).unwrap_or_default());
            let (artifacts, notes) = runner::plot(&report, &out)?;
            for a in artifacts {
                println!("{} {}", a.sha256, out.join(a.file).display());
            }
            for n in notes {
                println!("note: {n}");
            }
            Ok(true)
        }
        Command::ListExperiments => {
            list();
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
