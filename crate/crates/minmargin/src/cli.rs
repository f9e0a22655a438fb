//! Command-line entry points: JSON configs in, CSV results out.
//!
//! The subcommands mirror the library's runners: `run` and `sweep` drive the
//! benchmark harness, `simulate` the two-Gaussian study, `theory` the
//! half-sphere verifier, and `ingest-check` loads the configured dataset and
//! reports its shape. Every subcommand reads an optional JSON config file,
//! applies `--set key=value` overrides onto it, validates the merged
//! document, and writes its outputs into a directory (`--out`, else
//! `$MINMARGIN_OUT`, else the working directory). Progress and warnings go
//! to standard error and results go to files, keeping standard output clean
//! for piping — except `ingest-check`, whose small JSON report *is* the
//! result and prints to standard output.
//!
//! Each run leaves two artifacts: the results CSV and a JSON sidecar echoing
//! the fully resolved config (defaults filled in, overrides applied) plus
//! wall-clock timings, so a results file can always be traced back to the
//! exact parameters that produced it.

use std::ffi::OsString;
use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::harness::{self, Progress};
use crate::{config, halfsphere, simulation, Error, Result};

/// Environment variable consulted for the output directory when `--out` is
/// not given.
pub const OUT_ENV: &str = "MINMARGIN_OUT";

/// Top-level argument parser for the `minmargin` binary.
#[derive(Debug, Parser)]
#[command(
    name = "minmargin",
    version,
    about = "Batch active sampling benchmarks with bootstrap ensembles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config file; omitted fields (or the whole flag) use defaults.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory for result files ($MINMARGIN_OUT, then ".", when omitted).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Override one config field, e.g. --set ensemble.num_models=50
    /// (repeatable; values parse as JSON, falling back to strings).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Cap the worker thread pool (defaults to all cores).
    #[arg(long, value_name = "N")]
    pub threads: Option<NonZeroUsize>,

    /// Suppress per-replicate progress lines.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Benchmark sampling strategies on one dataset across batch sizes.
    Run(CommonArgs),

    /// Repeat a benchmark across ensemble sizes or bootstrap fractions.
    Sweep(CommonArgs),

    /// Learning curves for the synthetic two-Gaussian task.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,

        /// Also write the points each strategy selects in one replicate.
        #[arg(long)]
        dump_selection: bool,
    },

    /// Monte-Carlo checks of the half-sphere selection analysis.
    Theory(CommonArgs),

    /// Load the configured dataset and report its shape as JSON.
    IngestCheck(CommonArgs),
}

impl Cli {
    /// Run the parsed command to completion. The binary prints any error and
    /// turns it into an exit code; see [`Error::exit_code`].
    pub fn execute(self) -> Result<()> {
        match self.command {
            Command::Run(common) => run_benchmark(&common, false),
            Command::Sweep(common) => run_benchmark(&common, true),
            Command::Simulate {
                common,
                dump_selection,
            } => run_simulation_cmd(&common, dump_selection),
            Command::Theory(common) => run_theory_cmd(&common),
            Command::IngestCheck(common) => run_ingest_check(&common),
        }
    }
}

fn run_benchmark(common: &CommonArgs, sweep: bool) -> Result<()> {
    init_threads(common.threads);
    let document = resolve_document(common)?;
    let (cfg, warnings) = config::validate_experiment(&document)?;
    report_warnings(&warnings);
    let dir = prepare_out_dir(common)?;

    let reporter = |done: usize, total: usize| eprintln!("replicate {done}/{total}");
    let progress: Option<Progress<'_>> = if common.quiet { None } else { Some(&reporter) };
    let (name, result) = if sweep {
        ("sweep", harness::run_sweep_with_progress(&cfg, progress)?)
    } else {
        ("run", harness::run_experiment_with_progress(&cfg, progress)?)
    };

    write_artifact(&dir, &format!("{name}.csv"), &result.to_csv())?;
    let echo = json!({
        "command": name,
        "config": cfg,
        "warnings": warnings,
        "timings": result.timings,
    });
    write_artifact(&dir, &format!("{name}.json"), &pretty(&echo))
}

fn run_simulation_cmd(common: &CommonArgs, dump_selection: bool) -> Result<()> {
    init_threads(common.threads);
    let document = resolve_document(common)?;
    let (cfg, warnings) = config::validate_simulation(&document)?;
    report_warnings(&warnings);
    let dir = prepare_out_dir(common)?;

    let reporter = |done: usize, total: usize| eprintln!("replicate {done}/{total}");
    let progress: Option<Progress<'_>> = if common.quiet { None } else { Some(&reporter) };
    let result = simulation::run_simulation_with_progress(&cfg, progress)?;

    write_artifact(&dir, "simulation.csv", &simulation::simulation_csv(&result))?;
    if dump_selection {
        let dump = simulation::dump_selection(&cfg, 0)?;
        write_artifact(&dir, "selected_points.csv", &dump)?;
    }
    let echo = json!({
        "command": "simulate",
        "config": cfg,
        "warnings": warnings,
        "timings": result.timings,
    });
    write_artifact(&dir, "simulation.json", &pretty(&echo))
}

fn run_theory_cmd(common: &CommonArgs) -> Result<()> {
    init_threads(common.threads);
    let document = resolve_document(common)?;
    let (cfg, warnings) = config::validate_theory(&document)?;
    report_warnings(&warnings);
    let dir = prepare_out_dir(common)?;

    if !common.quiet {
        eprintln!(
            "running {} selection comparisons and the closed-form checks",
            cfg.comparisons.len()
        );
    }
    let wall = Instant::now();
    let report = halfsphere::run_theory(&cfg)?;

    write_artifact(&dir, "theory.csv", &report.to_csv())?;
    let echo = json!({
        "command": "theory",
        "config": cfg,
        "warnings": warnings,
        "total_wall_secs": wall.elapsed().as_secs_f64(),
    });
    write_artifact(&dir, "theory.json", &pretty(&echo))
}

fn run_ingest_check(common: &CommonArgs) -> Result<()> {
    let document = resolve_document(common)?;
    let (cfg, warnings) = config::validate_experiment(&document)?;
    report_warnings(&warnings);

    let data = cfg.load_source()?;
    let report = json!({
        "rows": data.len(),
        "features": data.dim(),
        "classes": data.num_classes(),
        "class_counts": data.class_counts(),
        "storage": if data.features().is_dense() { "dense" } else { "sparse" },
    });
    println!("{}", pretty(&report));
    Ok(())
}

/// Load the config file (an empty document when none is given) and apply the
/// `--set` overrides onto it.
fn resolve_document(common: &CommonArgs) -> Result<Value> {
    let mut document = match &common.config {
        Some(path) => config::load_document(path)?,
        None => Value::Object(serde_json::Map::new()),
    };
    config::apply_overrides(&mut document, &common.overrides)?;
    Ok(document)
}

/// Pick the output directory: the flag wins, then the environment variable,
/// then the working directory.
fn resolve_out_dir(flag: Option<PathBuf>, env: Option<OsString>) -> PathBuf {
    flag.or_else(|| env.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn prepare_out_dir(common: &CommonArgs) -> Result<PathBuf> {
    let dir = resolve_out_dir(common.out.clone(), std::env::var_os(OUT_ENV));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn report_warnings(warnings: &[String]) {
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
}

/// Cap the global worker pool. Rayon's global pool can only be configured
/// once per process, so a second cap (e.g. from tests) is reported, not
/// fatal.
fn init_threads(threads: Option<NonZeroUsize>) {
    if let Some(n) = threads {
        let built = rayon::ThreadPoolBuilder::new()
            .num_threads(n.get())
            .build_global();
        if built.is_err() {
            eprintln!("warning: thread pool already initialized; --threads ignored");
        }
    }
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON value serializes")
}
