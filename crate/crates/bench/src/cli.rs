//! `tsexplore` subcommands.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tsexplore_core::hardness::{hardness_report, HardnessReport};

use crate::config::{Algo, ExperimentSpec, QRule};
use crate::harness::{self, problems, records, run_experiment, summarize, Summary};
use crate::BenchError;

#[derive(Debug, Parser)]
#[command(name = "tsexplore", version, about = "Pure-exploration bandit experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single cell (one algorithm, instance and delta).
    Run(RunArgs),
    /// Run every cell of the configured grid.
    Sweep(RunArgs),
    /// Print width, H0, H1 and H2 of each configured instance as JSON.
    Hardness {
        #[arg(long)]
        config: PathBuf,
    },
    /// Monitored TS-Explore runs; checks the concentration events and the pull bound.
    Verify(VerifyArgs),
    /// Complexity against problem size at delta = 1e-3 (n in 2, 4, 8, 16).
    #[command(name = "reproduce-fig1")]
    ReproduceFig1(ReproduceArgs),
    /// Complexity against delta for n = 2 (delta from 1e-1 to 1e-5).
    /// The smallest delta takes several minutes per hundred trials.
    #[command(name = "reproduce-fig2")]
    ReproduceFig2(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Base seed (overrides `base_seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (overrides `parallelism`).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Trials per cell (overrides `trials`).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Record wall-clock time per run (overrides `timing`).
    #[arg(long)]
    pub timing: bool,
}

impl Overrides {
    fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(s) = self.seed {
            spec.base_seed = s;
        }
        if let Some(j) = self.jobs {
            spec.parallelism = j;
        }
        if let Some(t) = self.trials {
            spec.trials = t;
        }
        if self.timing {
            spec.timing = true;
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Raw per-run CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-cell summary CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Attach event monitors to TS-Explore runs.
    #[arg(long)]
    pub monitor: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Raw per-run CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary CSV; stdout when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), BenchError> {
    match command {
        Command::Run(args) => {
            let spec = load(&args)?;
            let cells = spec.algorithms.len() * problems(&spec)?.len() * spec.delta_grid.len();
            if cells != 1 {
                return Err(BenchError::Config(format!(
                    "run takes exactly one cell, the config has {cells}; use sweep"
                )));
            }
            experiment(&spec, args.out.as_deref(), args.summary.as_deref())
        }
        Command::Sweep(args) => {
            let spec = load(&args)?;
            experiment(&spec, args.out.as_deref(), args.summary.as_deref())
        }
        Command::Hardness { config } => hardness(&ExperimentSpec::from_path(&config)?),
        Command::Verify(args) => verify(&args),
        Command::ReproduceFig1(args) => {
            let mut spec = fig1_spec();
            args.overrides.apply(&mut spec);
            reproduce(&spec, &args, true)
        }
        Command::ReproduceFig2(args) => {
            let mut spec = fig2_spec();
            args.overrides.apply(&mut spec);
            reproduce(&spec, &args, false)
        }
    }
}

fn load(args: &RunArgs) -> Result<ExperimentSpec, BenchError> {
    let mut spec = ExperimentSpec::from_path(&args.config)?;
    args.overrides.apply(&mut spec);
    if args.monitor {
        spec.monitor = true;
    }
    spec.validate()?;
    Ok(spec)
}

fn experiment(spec: &ExperimentSpec, out: Option<&Path>, summary: Option<&Path>) -> Result<(), BenchError> {
    let rows = records(&run_experiment(spec)?);
    match out {
        Some(p) => harness::emit_records(&rows, p)?,
        None => harness::write_records(&rows, io::stdout().lock())?,
    }
    if let Some(p) = summary {
        harness::emit_summaries(&summarize(&rows), p)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct HardnessLine<'a> {
    instance: &'a str,
    #[serde(flatten)]
    report: HardnessReport,
}

fn hardness(spec: &ExperimentSpec) -> Result<(), BenchError> {
    let mut stdout = io::stdout().lock();
    for p in problems(spec)? {
        let line = HardnessLine {
            instance: &p.id,
            report: hardness_report(&p.instance, &p.family)?,
        };
        let text = serde_json::to_string(&line).map_err(|e| BenchError::Config(e.to_string()))?;
        writeln!(stdout, "{text}")?;
    }
    Ok(())
}

/// Counts over monitored TS-Explore runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyReport {
    pub runs: usize,
    pub events_hold: usize,
    pub event_rate: f64,
    /// Pull-bound violations in runs where every event held.
    pub conditional_violations: usize,
    /// Pull-bound violations in all runs.
    pub total_violations: usize,
}

pub fn verify_spec(spec: &ExperimentSpec) -> Result<VerifyReport, BenchError> {
    let mut spec = spec.clone();
    spec.monitor = true;
    spec.algorithms = vec![Algo::Tsexplore];
    let rows = run_experiment(&spec)?;
    let monitored: Vec<_> = rows.iter().filter_map(|r| r.monitor).collect();
    let events_hold = monitored.iter().filter(|m| m.events_hold).count();
    Ok(VerifyReport {
        runs: monitored.len(),
        events_hold,
        event_rate: events_hold as f64 / monitored.len().max(1) as f64,
        conditional_violations: monitored
            .iter()
            .filter(|m| m.events_hold)
            .map(|m| m.pull_bound_violations)
            .sum(),
        total_violations: monitored.iter().map(|m| m.pull_bound_violations).sum(),
    })
}

fn verify(args: &VerifyArgs) -> Result<(), BenchError> {
    let mut spec = ExperimentSpec::from_path(&args.config)?;
    args.overrides.apply(&mut spec);
    spec.monitor = true;
    spec.validate()?;
    let report = verify_spec(&spec)?;
    println!(
        "{}",
        serde_json::to_string(&report).map_err(|e| BenchError::Config(e.to_string()))?
    );
    if report.conditional_violations > 0 {
        return Err(BenchError::Verification(format!(
            "{} pull-bound violations in runs where all events held",
            report.conditional_violations
        )));
    }
    Ok(())
}

pub fn fig1_spec() -> ExperimentSpec {
    ExperimentSpec {
        instance: None,
        family: None,
        n_grid: vec![2, 4, 8, 16],
        algorithms: vec![Algo::Tsexplore, Algo::Clucb],
        delta_grid: vec![1e-3],
        q_rule: QRule::EqualDelta,
        trials: 100,
        base_seed: 0,
        parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
        monitor: false,
        timing: false,
        max_pulls: None,
    }
}

pub fn fig2_spec() -> ExperimentSpec {
    ExperimentSpec {
        n_grid: vec![2],
        delta_grid: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
        ..fig1_spec()
    }
}

/// Summary row with the `H0 ln(1/delta)` reference value.
#[derive(Debug, Clone, PartialEq, Serialize)]
struct Fig1Row {
    algo: Algo,
    instance: String,
    n: Option<usize>,
    delta: f64,
    q: f64,
    trials: usize,
    mean_complexity: f64,
    std_complexity: f64,
    error_rate: f64,
    nonterm_rate: f64,
    h0_log_ref: f64,
}

fn reproduce(spec: &ExperimentSpec, args: &ReproduceArgs, with_reference: bool) -> Result<(), BenchError> {
    spec.validate()?;
    let rows = records(&run_experiment(spec)?);
    if let Some(p) = &args.out {
        harness::emit_records(&rows, p)?;
    }
    let summaries = summarize(&rows);
    let sink: Box<dyn Write> = match &args.summary {
        Some(p) => Box::new(io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    if !with_reference {
        return harness::write_summaries(&summaries, sink);
    }
    let h0: Vec<(String, f64)> = problems(spec)?
        .iter()
        .map(|p| Ok((p.id.clone(), hardness_report(&p.instance, &p.family)?.h0)))
        .collect::<Result<_, BenchError>>()?;
    let mut wtr = csv::Writer::from_writer(sink);
    for s in summaries {
        let Summary {
            algo,
            instance,
            n,
            delta,
            q,
            trials,
            mean_complexity,
            std_complexity,
            error_rate,
            nonterm_rate,
        } = s;
        let h = h0.iter().find(|(id, _)| *id == instance).map_or(f64::NAN, |x| x.1);
        wtr.serialize(Fig1Row {
            algo,
            instance,
            n,
            delta,
            q,
            trials,
            mean_complexity,
            std_complexity,
            error_rate,
            nonterm_rate,
            h0_log_ref: h * (1.0 / delta).ln(),
        })?;
    }
    wtr.flush()?;
    Ok(())
}
