//! Deterministic multi-trial execution, aggregation and CSV input/output.

use std::cmp::Ordering;
use std::io;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tsexplore_core::baselines::{run_clucb, run_roundrobin, ClucbConfig};
use tsexplore_core::hardness::{check_events, check_pull_bound};
use tsexplore_core::model::gap_profile;
use tsexplore_core::structures::DEFAULT_ENUMERATION_CAP;
use tsexplore_core::tsexplore::{run, TraceLevel, DEFAULT_MAX_PULLS};
use tsexplore_core::{ArmSet, BanditInstance, RandomStream, SuperArmFamily, TsConfig};

use crate::config::{make_problem, problem_id, Algo, ExperimentSpec};
use crate::BenchError;

/// A concrete instance of an experiment with its optimal super arm.
#[derive(Debug, Clone)]
pub struct Problem {
    pub id: String,
    pub n: Option<usize>,
    pub instance: BanditInstance,
    pub family: SuperArmFamily,
    pub s_star: ArmSet,
}

impl Problem {
    /// Fails if the optimal super arm is not unique.
    pub fn new(
        id: String,
        n: Option<usize>,
        instance: BanditInstance,
        family: SuperArmFamily,
    ) -> Result<Self, BenchError> {
        if instance.distributions().len() != family.num_arms() {
            return Err(BenchError::Config(format!(
                "instance has {} arms, family {}",
                instance.distributions().len(),
                family.num_arms()
            )));
        }
        let s_star = match family.exact_size(DEFAULT_ENUMERATION_CAP) {
            Some(_) => gap_profile(&instance, &family)?.s_star().clone(),
            None => family.oracle(instance.true_means())?,
        };
        Ok(Self {
            id,
            n,
            instance,
            family,
            s_star,
        })
    }
}

/// Instances named by a spec: the explicit one first, then `n_grid` in order.
pub fn problems(spec: &ExperimentSpec) -> Result<Vec<Problem>, BenchError> {
    let mut out = Vec::new();
    if let (Some(inst), Some(fam)) = (&spec.instance, &spec.family) {
        let instance = BanditInstance::new(inst.arms.clone())?;
        let id = inst.name.clone().unwrap_or_else(|| "custom".into());
        out.push(Problem::new(id, None, instance, fam.build()?)?);
    }
    for &n in &spec.n_grid {
        let (instance, family) = make_problem(n)?;
        out.push(Problem::new(problem_id(n), Some(n), instance, family)?);
    }
    Ok(out)
}

/// Stable 64-bit stream id of `(instance, delta, q, trial)`.
///
/// The algorithm is left out so every algorithm sees the same stream for
/// the same trial.
pub fn stream_id(instance: &str, delta: f64, q: f64, trial: usize) -> u64 {
    let mut h = Sha256::new();
    h.update((instance.len() as u64).to_le_bytes());
    h.update(instance.as_bytes());
    h.update(delta.to_bits().to_le_bytes());
    h.update(q.to_bits().to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorResult {
    pub events_hold: bool,
    pub pull_bound_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algo: Algo,
    pub instance: String,
    pub n: Option<usize>,
    pub delta: f64,
    pub q: f64,
    pub trial: usize,
    pub seed: u64,
    pub complexity: u64,
    pub output: Option<ArmSet>,
    pub correct: bool,
    pub terminated: bool,
    pub wall_ms: f64,
    pub monitor: Option<MonitorResult>,
}

impl RunResult {
    pub fn record(&self) -> RunRecord {
        RunRecord {
            algo: self.algo,
            instance: self.instance.clone(),
            n: self.n,
            delta: self.delta,
            q: self.q,
            trial: self.trial,
            seed: self.seed,
            complexity: self.complexity,
            correct: self.correct,
            terminated: self.terminated,
            wall_ms: self.wall_ms,
        }
    }
}

/// One raw CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algo: Algo,
    pub instance: String,
    pub n: Option<usize>,
    pub delta: f64,
    pub q: f64,
    pub trial: usize,
    pub seed: u64,
    pub complexity: u64,
    pub correct: bool,
    pub terminated: bool,
    pub wall_ms: f64,
}

fn row_order(
    a: (Algo, &str, Option<usize>, f64, f64, usize),
    b: (Algo, &str, Option<usize>, f64, f64, usize),
) -> Ordering {
    a.0.name()
        .cmp(b.0.name())
        .then(a.2.cmp(&b.2))
        .then(a.1.cmp(b.1))
        .then(a.3.total_cmp(&b.3))
        .then(a.4.total_cmp(&b.4))
        .then(a.5.cmp(&b.5))
}

impl RunRecord {
    fn key(&self) -> (Algo, &str, Option<usize>, f64, f64, usize) {
        (self.algo, &self.instance, self.n, self.delta, self.q, self.trial)
    }
}

/// Sorts by algorithm, instance (by problem size first), delta, q and trial.
pub fn sort_records(rows: &mut [RunRecord]) {
    rows.sort_by(|a, b| row_order(a.key(), b.key()));
}

struct Job<'p> {
    algo: Algo,
    problem: &'p Problem,
    delta: f64,
    q: f64,
    trial: usize,
}

/// Runs every (algorithm, instance, delta, trial) combination.
///
/// Results come back sorted as in [`sort_records`] and do not depend on
/// `spec.parallelism`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunResult>, BenchError> {
    spec.validate()?;
    let problems = problems(spec)?;
    let mut jobs = Vec::new();
    for &algo in &spec.algorithms {
        for p in &problems {
            for &delta in &spec.delta_grid {
                let q = spec.q_rule.q_for(delta);
                for trial in 0..spec.trials {
                    jobs.push(Job {
                        algo,
                        problem: p,
                        delta,
                        q,
                        trial,
                    });
                }
            }
        }
    }
    jobs.sort_by(|a, b| {
        row_order(
            (a.algo, &a.problem.id, a.problem.n, a.delta, a.q, a.trial),
            (b.algo, &b.problem.id, b.problem.n, b.delta, b.q, b.trial),
        )
    });
    jobs.dedup_by(|a, b| {
        a.algo == b.algo
            && a.problem.id == b.problem.id
            && a.delta == b.delta
            && a.q == b.q
            && a.trial == b.trial
    });

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallelism)
        .build()
        .map_err(|e| BenchError::Config(e.to_string()))?;
    pool.install(|| jobs.par_iter().map(|j| run_job(spec, j)).collect())
}

fn run_job(spec: &ExperimentSpec, job: &Job<'_>) -> Result<RunResult, BenchError> {
    let p = job.problem;
    let max_pulls = spec.max_pulls.unwrap_or(DEFAULT_MAX_PULLS);
    let mut rng = RandomStream::new(spec.base_seed, stream_id(&p.id, job.delta, job.q, job.trial));
    let start = Instant::now();
    let mut monitor = None;
    let outcome = match job.algo {
        Algo::Tsexplore => {
            let cfg = TsConfig::for_family(job.delta, job.q, &p.family)?.with_max_pulls(max_pulls);
            let level = if spec.monitor {
                TraceLevel::Samples
            } else {
                TraceLevel::Off
            };
            let out = run(&p.instance, &p.family, &cfg, &mut rng, level)?;
            if let Some(trace) = &out.trace {
                let events = check_events(trace, &p.instance, &p.family)?;
                let violations = check_pull_bound(trace, &p.instance, &p.family)?;
                monitor = Some(MonitorResult {
                    events_hold: events.all_hold(),
                    pull_bound_violations: violations.len(),
                });
            }
            out
        }
        Algo::Clucb => {
            let cfg = ClucbConfig::new(job.delta)?.with_max_pulls(max_pulls);
            run_clucb(&p.instance, &p.family, &cfg, &mut rng)?
        }
        Algo::Roundrobin => {
            let cfg = ClucbConfig::new(job.delta)?.with_max_pulls(max_pulls);
            run_roundrobin(&p.instance, &p.family, &cfg, &mut rng)?
        }
    };
    let wall_ms = if spec.timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    if !outcome.terminated {
        log::warn!(
            "{} on {} (delta {}, trial {}) hit the pull budget",
            job.algo,
            p.id,
            job.delta,
            job.trial
        );
    }
    let correct = outcome.terminated && outcome.output.as_ref() == Some(&p.s_star);
    Ok(RunResult {
        algo: job.algo,
        instance: p.id.clone(),
        n: p.n,
        delta: job.delta,
        q: job.q,
        trial: job.trial,
        seed: spec.base_seed,
        complexity: outcome.complexity,
        output: outcome.output,
        correct,
        terminated: outcome.terminated,
        wall_ms,
        monitor,
    })
}

/// Per-cell aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algo: Algo,
    pub instance: String,
    pub n: Option<usize>,
    pub delta: f64,
    pub q: f64,
    pub trials: usize,
    pub mean_complexity: f64,
    /// Population standard deviation.
    pub std_complexity: f64,
    /// Terminated runs with a wrong output, over all runs.
    pub error_rate: f64,
    pub nonterm_rate: f64,
}

/// Groups rows by (algorithm, instance, delta, q) in row order.
pub fn summarize(rows: &[RunRecord]) -> Vec<Summary> {
    let mut sorted = rows.to_vec();
    sort_records(&mut sorted);
    let mut out = Vec::new();
    for cell in sorted.chunk_by(|a, b| {
        a.algo == b.algo && a.instance == b.instance && a.delta == b.delta && a.q == b.q
    }) {
        let k = cell.len() as f64;
        let mean = cell.iter().map(|r| r.complexity as f64).sum::<f64>() / k;
        let var = cell
            .iter()
            .map(|r| {
                let d = r.complexity as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / k;
        let errors = cell.iter().filter(|r| r.terminated && !r.correct).count();
        let nonterm = cell.iter().filter(|r| !r.terminated).count();
        let first = &cell[0];
        out.push(Summary {
            algo: first.algo,
            instance: first.instance.clone(),
            n: first.n,
            delta: first.delta,
            q: first.q,
            trials: cell.len(),
            mean_complexity: mean,
            std_complexity: var.sqrt(),
            error_rate: errors as f64 / k,
            nonterm_rate: nonterm as f64 / k,
        });
    }
    out
}

pub fn records(rows: &[RunResult]) -> Vec<RunRecord> {
    let mut out: Vec<RunRecord> = rows.iter().map(RunResult::record).collect();
    sort_records(&mut out);
    out
}

/// Writes header plus rows, sorted.
pub fn write_records<W: io::Write>(rows: &[RunRecord], w: W) -> Result<(), BenchError> {
    let mut sorted = rows.to_vec();
    sort_records(&mut sorted);
    write_csv(&sorted, RECORD_HEADER, w)
}

pub fn write_summaries<W: io::Write>(rows: &[Summary], w: W) -> Result<(), BenchError> {
    write_csv(rows, SUMMARY_HEADER, w)
}

pub const RECORD_HEADER: &[&str] = &[
    "algo", "instance", "n", "delta", "q", "trial", "seed", "complexity", "correct", "terminated",
    "wall_ms",
];

pub const SUMMARY_HEADER: &[&str] = &[
    "algo",
    "instance",
    "n",
    "delta",
    "q",
    "trials",
    "mean_complexity",
    "std_complexity",
    "error_rate",
    "nonterm_rate",
];

fn write_csv<T: Serialize, W: io::Write>(rows: &[T], header: &[&str], w: W) -> Result<(), BenchError> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(header)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_records<R: io::Read>(r: R) -> Result<Vec<RunRecord>, BenchError> {
    read_csv(r, RECORD_HEADER)
}

pub fn read_summaries<R: io::Read>(r: R) -> Result<Vec<Summary>, BenchError> {
    read_csv(r, SUMMARY_HEADER)
}

fn read_csv<T: for<'de> Deserialize<'de>, R: io::Read>(
    r: R,
    header: &[&str],
) -> Result<Vec<T>, BenchError> {
    let mut rdr = csv::Reader::from_reader(r);
    let got: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    if got != header {
        return Err(BenchError::Config(format!("unexpected CSV header {got:?}")));
    }
    rdr.deserialize().map(|r| r.map_err(BenchError::from)).collect()
}

pub fn emit_records(rows: &[RunRecord], path: &Path) -> Result<(), BenchError> {
    write_records(rows, io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn emit_summaries(rows: &[Summary], path: &Path) -> Result<(), BenchError> {
    write_summaries(rows, io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn parse_records(path: &Path) -> Result<Vec<RunRecord>, BenchError> {
    read_records(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(algo: Algo, trial: usize, z: u64, correct: bool, terminated: bool) -> RunRecord {
        RunRecord {
            algo,
            instance: "problem-2".into(),
            n: Some(2),
            delta: 0.1,
            q: 0.1,
            trial,
            seed: 0,
            complexity: z,
            correct,
            terminated,
            wall_ms: 0.0,
        }
    }

    #[test]
    fn summary_statistics() {
        let s = summarize(&[rec(Algo::Clucb, 0, 10, true, true), rec(Algo::Clucb, 1, 14, true, true)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].mean_complexity, 12.0);
        assert_eq!(s[0].std_complexity, 2.0);
        let s = summarize(&[rec(Algo::Clucb, 0, 7, true, true), rec(Algo::Clucb, 1, 7, true, true)]);
        assert_eq!(s[0].std_complexity, 0.0);
        let s = summarize(&[
            rec(Algo::Clucb, 0, 7, true, true),
            rec(Algo::Clucb, 1, 7, false, true),
            rec(Algo::Clucb, 2, 7, false, true),
            rec(Algo::Clucb, 3, 9, false, false),
        ]);
        assert_eq!(s[0].error_rate, 0.5);
        assert_eq!(s[0].nonterm_rate, 0.25);
    }

    #[test]
    fn cells_split_by_algo_and_delta() {
        let mut b = rec(Algo::Clucb, 0, 5, true, true);
        b.delta = 0.01;
        let s = summarize(&[rec(Algo::Tsexplore, 0, 4, true, true), rec(Algo::Clucb, 0, 6, true, true), b]);
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].algo, Algo::Clucb);
        assert_eq!(s[0].delta, 0.01);
    }

    #[test]
    fn csv_shapes() {
        let mut buf = Vec::new();
        write_records(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "algo,instance,n,delta,q,trial,seed,complexity,correct,terminated,wall_ms\n"
        );
        let mut buf = Vec::new();
        write_records(&[rec(Algo::Tsexplore, 3, 210, true, true)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap(), "tsexplore,problem-2,2,0.1,0.1,3,0,210,true,true,0.0");
    }

    #[test]
    fn csv_round_trip() {
        let mut rows = vec![
            rec(Algo::Tsexplore, 1, 210, true, true),
            rec(Algo::Clucb, 0, 1234, false, false),
        ];
        rows[1].n = None;
        rows[1].instance = "custom".into();
        rows[1].delta = 1e-5;
        rows[1].wall_ms = 3.25;
        let mut buf = Vec::new();
        write_records(&rows, &mut buf).unwrap();
        let back = read_records(buf.as_slice()).unwrap();
        sort_records(&mut rows);
        assert_eq!(back, rows);
        assert_eq!(summarize(&back), summarize(&rows));

        let s = summarize(&rows);
        let mut buf = Vec::new();
        write_summaries(&s, &mut buf).unwrap();
        assert_eq!(read_summaries(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn stream_ids_are_stable_and_distinct() {
        let a = stream_id("problem-2", 0.1, 0.1, 0);
        assert_eq!(a, stream_id("problem-2", 0.1, 0.1, 0));
        assert_ne!(a, stream_id("problem-2", 0.1, 0.1, 1));
        assert_ne!(a, stream_id("problem-4", 0.1, 0.1, 0));
        assert_ne!(a, stream_id("problem-2", 0.01, 0.1, 0));
    }

    #[test]
    fn problem_sort_is_numeric() {
        let mut a = rec(Algo::Clucb, 0, 1, true, true);
        a.n = Some(16);
        a.instance = "problem-16".into();
        let b = rec(Algo::Clucb, 0, 1, true, true);
        let mut v = vec![a, b];
        sort_records(&mut v);
        assert_eq!(v[0].n, Some(2));
    }
}
