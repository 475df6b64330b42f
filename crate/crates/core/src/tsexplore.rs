//! TS-Explore: pure exploration driven by Gaussian random samples.
//!
//! At each step the policy perturbs the empirical means `M(delta, q, t)`
//! times with independent Gaussian noise of variance `C(delta, q, t) / N_i`,
//! and asks the oracle for the best super arm under each perturbation. If
//! every perturbed answer agrees with the empirical best super arm it is
//! returned. Otherwise the perturbation with the largest reward gap over the
//! empirical best is selected and the least-pulled arm in the symmetric
//! difference is pulled.
//!
//! The sample loop is streamed: only the running best gap and its super arm
//! are kept, so memory per step is `O(m)` whatever the value of `M`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{ArmStats, Environment};
use crate::sampler::{phi, RandomStream};
use crate::structures::{
    explicit_argmax, ArmSet, FamilyKind, OracleWorkspace, SuperArmFamily, DEFAULT_ENUMERATION_CAP,
};
use crate::{Error, Result};

/// Default pull budget before a run is declared non-terminating.
pub const DEFAULT_MAX_PULLS: u64 = 1_000_000_000;

/// Error constraint above which `(delta, q)` is clamped to `(0.1, 0.1)`.
pub const DELTA_CLAMP: f64 = 0.1;

/// Parameters of a TS-Explore run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsConfig {
    delta: f64,
    q: f64,
    family_size: f64,
    max_pulls: u64,
    phi_q: f64,
}

impl TsConfig {
    /// Validates `delta in (0, 1)` and `q in [delta, 0.1]`.
    ///
    /// When `delta > 0.1` both parameters are clamped to `0.1` and the
    /// supplied `q` is ignored. `family_size` is `|I|` as used in `M` and `C`.
    pub fn new(delta: f64, q: f64, family_size: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must be in (0, 1), got {delta}")));
        }
        if !(family_size >= 1.0 && family_size.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "family size must be a finite value >= 1, got {family_size}"
            )));
        }
        let (delta, q) = if delta > DELTA_CLAMP {
            (DELTA_CLAMP, DELTA_CLAMP)
        } else {
            if !(q >= delta && q <= DELTA_CLAMP) {
                return Err(Error::InvalidParameter(format!(
                    "q must be in [delta, 0.1] = [{delta}, 0.1], got {q}"
                )));
            }
            (delta, q)
        };
        Ok(Self {
            delta,
            q,
            family_size,
            max_pulls: DEFAULT_MAX_PULLS,
            phi_q: phi(q)?,
        })
    }

    /// Uses `|I|` when the family enumerates within the default cap, `2^m` otherwise.
    pub fn for_family(delta: f64, q: f64, family: &SuperArmFamily) -> Result<Self> {
        Self::new(delta, q, family.size_hint(DEFAULT_ENUMERATION_CAP))
    }

    pub fn with_max_pulls(mut self, max_pulls: u64) -> Self {
        self.max_pulls = max_pulls;
        self
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn family_size(&self) -> f64 {
        self.family_size
    }

    pub fn max_pulls(&self) -> u64 {
        self.max_pulls
    }

    /// `phi(q)`, cached.
    pub fn phi_q(&self) -> f64 {
        self.phi_q
    }

    pub fn num_samples(&self, t: u64) -> u64 {
        schedule_m(self.delta, self.q, t, self.family_size)
    }

    pub fn scale(&self, t: u64) -> f64 {
        log_term(self.delta, t, self.family_size) / (self.phi_q * self.phi_q)
    }

    /// `L1(t) = ln(12 |I|^2 t^2 / delta)`.
    pub fn l1(&self, t: u64) -> f64 {
        log_term(self.delta, t, self.family_size)
    }

    /// `L2(t) = ln(12 |I|^2 t^2 M(t) / delta)`.
    pub fn l2(&self, t: u64) -> f64 {
        self.l1(t) + libm::log(self.num_samples(t) as f64)
    }
}

/// `ln(12 |I|^2 t^2 / delta)`, computed term by term so `|I| = 2^m` cannot overflow.
pub fn log_term(delta: f64, t: u64, family_size: f64) -> f64 {
    libm::log(12.0) + 2.0 * libm::log(family_size) + 2.0 * libm::log(t as f64) - libm::log(delta)
}

/// Number of sample vectors drawn at step `t`: `ceil(ln(12 |I|^2 t^2 / delta) / q)`, at least 1.
pub fn schedule_m(delta: f64, q: f64, t: u64, family_size: f64) -> u64 {
    let m = libm::ceil(log_term(delta, t, family_size) / q);
    if m < 1.0 {
        1
    } else {
        m as u64
    }
}

/// Variance scale `C = ln(12 |I|^2 t^2 / delta) / phi(q)^2`.
pub fn scale_c(delta: f64, q: f64, t: u64, family_size: f64) -> Result<f64> {
    let p = phi(q)?;
    Ok(log_term(delta, t, family_size) / (p * p))
}

/// What the policy does at a step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Pull(usize),
    Output(ArmSet),
}

/// Supplies the sample vectors of a step.
pub trait SampleSource {
    /// Write the `k`-th sample vector (zero-based) into `out`, given the
    /// empirical means and per-arm standard deviations `sqrt(C / N_i)`.
    fn draw(&mut self, k: u64, means: &[f64], std_devs: &[f64], out: &mut [f64]);
}

/// Independent Gaussian perturbations drawn from a [`RandomStream`].
pub struct GaussianSamples<'a> {
    rng: &'a mut RandomStream,
}

impl<'a> GaussianSamples<'a> {
    pub fn new(rng: &'a mut RandomStream) -> Self {
        Self { rng }
    }
}

impl SampleSource for GaussianSamples<'_> {
    #[inline]
    fn draw(&mut self, _k: u64, means: &[f64], std_devs: &[f64], out: &mut [f64]) {
        for ((o, &mu), &sd) in out.iter_mut().zip(means).zip(std_devs) {
            *o = mu + sd * self.rng.standard_normal();
        }
    }
}

/// Summary of one decision, kept for the monitors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    /// `M(delta, q, t)`.
    pub num_samples: u64,
    pub s_hat: ArmSet,
    /// Zero-based index of the sample vector with the largest gap.
    pub k_star: Option<u64>,
    pub gap: f64,
    pub s_tilde: Option<ArmSet>,
    pub decision: Decision,
}

/// Per-step decision maker with reusable buffers.
#[derive(Debug, Clone)]
pub struct TsExplore<'f> {
    family: &'f SuperArmFamily,
    cfg: TsConfig,
    means: Vec<f64>,
    std_devs: Vec<f64>,
    theta: Vec<f64>,
    s_hat: ArmSet,
    s_tilde: ArmSet,
    best_set: ArmSet,
    values: Vec<f64>,
    oracle_ws: OracleWorkspace,
}

impl<'f> TsExplore<'f> {
    pub fn new(family: &'f SuperArmFamily, cfg: TsConfig) -> Self {
        let m = family.num_arms();
        Self {
            family,
            cfg,
            means: vec![0.0; m],
            std_devs: vec![0.0; m],
            theta: vec![0.0; m],
            s_hat: ArmSet::with_capacity(m),
            s_tilde: ArmSet::with_capacity(m),
            best_set: ArmSet::with_capacity(m),
            values: match family.kind() {
                FamilyKind::Explicit(s) => Vec::with_capacity(s.len()),
                _ => Vec::new(),
            },
            oracle_ws: OracleWorkspace::default(),
        }
    }

    pub fn config(&self) -> &TsConfig {
        &self.cfg
    }

    /// Decide at step `stats.t()`.
    ///
    /// When `record` is given every sample vector is appended to it, row by
    /// row; this is the monitoring path and costs `O(M m)` memory.
    ///
    /// The gap-maximizing sample is chosen among vectors whose best super arm
    /// differs from the empirical best (the others have gap exactly zero and
    /// an empty symmetric difference). Ties go to the smallest `k`.
    pub fn step<S: SampleSource + ?Sized>(
        &mut self,
        stats: &ArmStats,
        samples: &mut S,
        mut record: Option<&mut Vec<f64>>,
    ) -> Result<StepRecord> {
        let m = self.family.num_arms();
        if stats.num_arms() != m {
            return Err(Error::InvalidParameter(format!(
                "stats cover {} arms, family {m}",
                stats.num_arms()
            )));
        }
        let t = stats.t();
        if t == 0 {
            return Err(Error::InvalidParameter("step counter must be >= 1".into()));
        }
        stats.empirical_means_into(&mut self.means)?;
        let num_samples = self.cfg.num_samples(t);
        let c = self.cfg.scale(t);
        for (sd, &n) in self.std_devs.iter_mut().zip(stats.counts()) {
            *sd = libm::sqrt(c / n as f64);
        }
        self.family
            .oracle_into(&self.means, &mut self.oracle_ws, &mut self.s_hat)?;

        let mut best: Option<(u64, f64)> = None;
        if let FamilyKind::Explicit(supers) = self.family.kind() {
            // compare by position in the list instead of building sets
            let hat = supers
                .binary_search(&self.s_hat)
                .expect("oracle output is a member");
            let mut best_idx = hat;
            for k in 0..num_samples {
                samples.draw(k, &self.means, &self.std_devs, &mut self.theta);
                if let Some(buf) = record.as_deref_mut() {
                    buf.extend_from_slice(&self.theta);
                }
                let idx = explicit_argmax(supers, &self.theta, &mut self.values);
                if idx == hat {
                    continue;
                }
                let gap = self.values[idx] - self.values[hat];
                if best.is_none_or(|(_, g)| gap > g) {
                    best = Some((k, gap));
                    best_idx = idx;
                }
            }
            self.best_set.copy_from(&supers[best_idx]);
        } else {
            for k in 0..num_samples {
                samples.draw(k, &self.means, &self.std_devs, &mut self.theta);
                if let Some(buf) = record.as_deref_mut() {
                    buf.extend_from_slice(&self.theta);
                }
                self.family
                    .oracle_into(&self.theta, &mut self.oracle_ws, &mut self.s_tilde)?;
                if self.s_tilde == self.s_hat {
                    continue;
                }
                let gap = self.s_tilde.value(&self.theta) - self.s_hat.value(&self.theta);
                if best.is_none_or(|(_, g)| gap > g) {
                    best = Some((k, gap));
                    self.best_set.copy_from(&self.s_tilde);
                }
            }
        }

        let Some((k_star, gap)) = best else {
            return Ok(StepRecord {
                t,
                num_samples,
                s_hat: self.s_hat.clone(),
                k_star: None,
                gap: 0.0,
                s_tilde: None,
                decision: Decision::Output(self.s_hat.clone()),
            });
        };
        let counts = stats.counts();
        let arm = self
            .s_hat
            .symmetric_difference(&self.best_set)
            .min_by_key(|&i| (counts[i], i))
            .expect("distinct sets have a nonempty symmetric difference");
        Ok(StepRecord {
            t,
            num_samples,
            s_hat: self.s_hat.clone(),
            k_star: Some(k_star),
            gap,
            s_tilde: Some(self.best_set.clone()),
            decision: Decision::Pull(arm),
        })
    }
}

/// One-shot form of [`TsExplore::step`].
pub fn step<S: SampleSource + ?Sized>(
    stats: &ArmStats,
    family: &SuperArmFamily,
    cfg: &TsConfig,
    samples: &mut S,
) -> Result<(Decision, StepRecord)> {
    let rec = TsExplore::new(family, *cfg).step(stats, samples, None)?;
    Ok((rec.decision.clone(), rec))
}

/// How much of a run to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceLevel {
    #[default]
    Off,
    /// Step records with `N(t)` and `R(t)`.
    Steps,
    /// Step records plus every sample vector. Memory grows as `M m` per step.
    Samples,
}

/// One recorded step: the statistics at the start of step `t` and what was decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub counts: Vec<u64>,
    pub sums: Vec<f64>,
    pub record: StepRecord,
    /// Row-major `num_samples x m` matrix of sample vectors, when recorded.
    pub samples: Option<Vec<f64>>,
}

impl TraceStep {
    pub fn t(&self) -> u64 {
        self.record.t
    }

    pub fn empirical_means(&self) -> Vec<f64> {
        self.sums
            .iter()
            .zip(&self.counts)
            .map(|(&r, &n)| r / n as f64)
            .collect()
    }

    /// The `k`-th sample vector.
    pub fn sample(&self, k: usize) -> Option<&[f64]> {
        let m = self.counts.len();
        self.samples.as_ref().and_then(|s| s.get(k * m..(k + 1) * m))
    }
}

/// Consecutive decision records of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub config: TsConfig,
    pub steps: Vec<TraceStep>,
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub output: Option<ArmSet>,
    /// Total observations, including the initial pull of every arm.
    pub complexity: u64,
    /// `false` when the pull budget ran out before a super arm was output.
    pub terminated: bool,
    /// Number of decisions taken after initialization.
    pub decisions: u64,
    pub trace: Option<RunTrace>,
}

pub(crate) fn check_arms<E: Environment + ?Sized>(env: &E, family: &SuperArmFamily) -> Result<()> {
    if env.num_arms() != family.num_arms() {
        return Err(Error::InvalidParameter(format!(
            "environment has {} arms, family {}",
            env.num_arms(),
            family.num_arms()
        )));
    }
    Ok(())
}

/// Pulls every arm once and sets `t = m`. Returns `false` if the budget
/// did not allow it.
pub(crate) fn initialize<E: Environment + ?Sized>(
    env: &E,
    stats: &mut ArmStats,
    rng: &mut RandomStream,
    max_pulls: u64,
) -> Result<bool> {
    let m = env.num_arms();
    for arm in 0..m {
        if stats.total() >= max_pulls {
            return Ok(false);
        }
        let r = env.pull(arm, rng)?;
        stats.update(arm, r)?;
    }
    stats.set_t(m as u64);
    Ok(true)
}

/// Runs TS-Explore to completion or until the pull budget is spent.
pub fn run<E: Environment + ?Sized>(
    env: &E,
    family: &SuperArmFamily,
    cfg: &TsConfig,
    rng: &mut RandomStream,
    trace: TraceLevel,
) -> Result<RunOutcome> {
    check_arms(env, family)?;
    let m = env.num_arms();
    let mut stats = ArmStats::new(m);
    let mut steps = Vec::new();
    let mut outcome = RunOutcome {
        output: None,
        complexity: 0,
        terminated: false,
        decisions: 0,
        trace: None,
    };
    if initialize(env, &mut stats, rng, cfg.max_pulls())? {
        let mut policy = TsExplore::new(family, *cfg);
        let mut sample_buf = Vec::new();
        loop {
            stats.tick();
            let keep_samples = trace == TraceLevel::Samples;
            sample_buf.clear();
            let rec = {
                let mut source = GaussianSamples::new(rng);
                policy.step(&stats, &mut source, keep_samples.then_some(&mut sample_buf))?
            };
            outcome.decisions += 1;
            let decision = rec.decision.clone();
            if trace != TraceLevel::Off {
                steps.push(TraceStep {
                    counts: stats.counts().to_vec(),
                    sums: stats.sums().to_vec(),
                    record: rec,
                    samples: keep_samples.then(|| core::mem::take(&mut sample_buf)),
                });
            }
            match decision {
                Decision::Output(s) => {
                    outcome.output = Some(s);
                    outcome.terminated = true;
                    break;
                }
                Decision::Pull(arm) => {
                    if stats.total() >= cfg.max_pulls() {
                        break;
                    }
                    let r = env.pull(arm, rng)?;
                    stats.update(arm, r)?;
                }
            }
        }
    }
    outcome.complexity = stats.total();
    if trace != TraceLevel::Off {
        outcome.trace = Some(RunTrace {
            config: *cfg,
            steps,
        });
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BanditInstance;

    /// Replays fixed vectors; vector `k` is `overrides[k]` if present, else the means.
    struct Injected {
        overrides: Vec<(u64, Vec<f64>)>,
    }

    impl SampleSource for Injected {
        fn draw(&mut self, k: u64, means: &[f64], _sd: &[f64], out: &mut [f64]) {
            match self.overrides.iter().find(|(j, _)| *j == k) {
                Some((_, v)) => out.copy_from_slice(v),
                None => out.copy_from_slice(means),
            }
        }
    }

    #[test]
    fn schedule_values() {
        // ceil(10 ln 12000) and ceil(1000 ln 4.8e6)
        assert_eq!(schedule_m(0.1, 0.1, 5, 2.0), 94);
        assert_eq!(schedule_m(1e-3, 1e-3, 10, 2.0), 15385);
        for t in 1..500 {
            assert!(schedule_m(0.05, 0.07, t + 1, 3.0) >= schedule_m(0.05, 0.07, t, 3.0));
        }
        assert!(schedule_m(0.1, 0.1, 1, 1.0) >= 1);
    }

    #[test]
    fn scale_values() {
        let c = scale_c(0.1, 0.1, 5, 2.0).unwrap();
        let l1 = libm::log(12_000.0);
        let p = 1.281_551_565_545; // upper 10% quantile
        assert!((c - l1 / (p * p)).abs() < 1e-9);
        assert!((c - 5.7185).abs() < 1e-3, "{c}");
        for t in 1..200 {
            assert!(scale_c(0.01, 0.05, t + 1, 4.0).unwrap() > scale_c(0.01, 0.05, t, 4.0).unwrap());
        }
        let p = phi(0.05).unwrap();
        let diff = scale_c(0.005, 0.05, 17, 4.0).unwrap() - scale_c(0.01, 0.05, 17, 4.0).unwrap();
        assert!((diff - libm::log(2.0) / (p * p)).abs() < 1e-12);
    }

    #[test]
    fn config_clamps_and_validates() {
        let c = TsConfig::new(0.3, 0.9, 2.0).unwrap();
        assert_eq!((c.delta(), c.q()), (0.1, 0.1));
        assert!(TsConfig::new(0.01, 0.001, 2.0).is_err());
        assert!(TsConfig::new(0.01, 0.2, 2.0).is_err());
        assert!(TsConfig::new(0.0, 0.1, 2.0).is_err());
        assert!(TsConfig::new(1.0, 0.1, 2.0).is_err());
        assert!(TsConfig::new(0.01, 0.05, 0.5).is_err());
        let c = TsConfig::new(1e-3, 1e-3, 2.0).unwrap();
        assert_eq!(c.max_pulls(), DEFAULT_MAX_PULLS);
        let f = SuperArmFamily::top_k(40, 20).unwrap();
        let c = TsConfig::for_family(0.1, 0.1, &f).unwrap();
        assert_eq!(c.family_size(), libm::pow(2.0, 40.0));
    }

    #[test]
    fn single_super_arm_outputs_immediately() {
        let fam = SuperArmFamily::explicit(2, [[0, 1]]).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap();
        let stats = ArmStats::from_parts(vec![1, 1], vec![0.0, 1.0]).unwrap();
        let mut src = Injected {
            overrides: vec![(0, vec![-5.0, 7.0])],
        };
        let (d, rec) = step(&stats, &fam, &cfg, &mut src).unwrap();
        assert_eq!(d, Decision::Output([0, 1].into()));
        assert_eq!(rec.k_star, None);
    }

    #[test]
    fn samples_equal_to_means_output() {
        let fam = SuperArmFamily::singletons(3).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap();
        let stats = ArmStats::from_parts(vec![4, 4, 4], vec![1.0, 3.0, 2.0]).unwrap();
        let (d, _) = step(&stats, &fam, &cfg, &mut Injected { overrides: vec![] }).unwrap();
        assert_eq!(d, Decision::Output([1].into()));
    }

    #[test]
    fn injected_disagreement_pulls_least_observed() {
        let fam = SuperArmFamily::singletons(2).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap();
        let stats = ArmStats::from_parts(vec![100, 1], vec![90.0, 0.1]).unwrap();
        let mut src = Injected {
            overrides: vec![(7, vec![0.2, 0.8])],
        };
        let (d, rec) = step(&stats, &fam, &cfg, &mut src).unwrap();
        assert_eq!(d, Decision::Pull(1));
        assert_eq!(rec.k_star, Some(7));
        assert_eq!(rec.s_tilde, Some([1].into()));
        assert!((rec.gap - 0.6).abs() < 1e-12);
    }

    #[test]
    fn largest_gap_wins_and_ties_go_to_first() {
        let fam = SuperArmFamily::singletons(3).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap();
        let stats = ArmStats::from_parts(vec![5, 2, 3], vec![4.0, 1.0, 1.0]).unwrap();
        let mut src = Injected {
            overrides: vec![
                (1, vec![0.5, 0.7, 0.0]),
                (2, vec![0.5, 0.0, 0.9]),
                (3, vec![0.5, 0.0, 0.9]),
            ],
        };
        let (d, rec) = step(&stats, &fam, &cfg, &mut src).unwrap();
        assert_eq!(rec.k_star, Some(2));
        assert_eq!(rec.s_tilde, Some([2].into()));
        // {0} xor {2}: arm 2 has fewer pulls
        assert_eq!(d, Decision::Pull(2));
    }

    #[test]
    fn step_requires_initialization() {
        let fam = SuperArmFamily::singletons(2).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap();
        let mut stats = ArmStats::new(2);
        stats.set_t(3);
        let r = step(&stats, &fam, &cfg, &mut Injected { overrides: vec![] });
        assert_eq!(r.unwrap_err(), Error::Unobserved(0));
    }

    #[test]
    fn deterministic_instance_outputs_best() {
        let inst = BanditInstance::bernoulli(&[1.0, 0.0]).unwrap();
        let fam = SuperArmFamily::singletons(2).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap();
        let mut rng = RandomStream::new(1, 0);
        let out = run(&inst, &fam, &cfg, &mut rng, TraceLevel::Steps).unwrap();
        assert!(out.terminated);
        assert_eq!(out.output, Some([0].into()));
        assert!(out.complexity >= 2);
        let trace = out.trace.unwrap();
        // first decision happens at t = m + 1
        assert_eq!(trace.steps[0].t(), 3);
        for w in trace.steps.windows(2) {
            assert_eq!(w[1].t(), w[0].t() + 1);
        }
    }

    #[test]
    fn single_super_arm_run_costs_m() {
        let inst = BanditInstance::bernoulli(&[0.3, 0.6, 0.2]).unwrap();
        let fam = SuperArmFamily::explicit(3, [[0, 2]]).unwrap();
        let cfg = TsConfig::for_family(0.05, 0.05, &fam).unwrap();
        let out = run(&inst, &fam, &cfg, &mut RandomStream::new(3, 3), TraceLevel::Off).unwrap();
        assert_eq!(out.complexity, 3);
        assert_eq!(out.output, Some([0, 2].into()));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let inst = BanditInstance::bernoulli(&[0.5, 0.49]).unwrap();
        let fam = SuperArmFamily::singletons(2).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap().with_max_pulls(10);
        let out = run(&inst, &fam, &cfg, &mut RandomStream::new(0, 0), TraceLevel::Off).unwrap();
        assert!(!out.terminated);
        assert_eq!(out.output, None);
        assert_eq!(out.complexity, 10);
    }

    #[test]
    fn run_is_deterministic() {
        let inst = BanditInstance::bernoulli(&[0.1, 0.1, 0.9, 0.9]).unwrap();
        let fam = SuperArmFamily::explicit(4, [[0, 1], [2, 3]]).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap();
        let a = run(&inst, &fam, &cfg, &mut RandomStream::new(42, 7), TraceLevel::Steps).unwrap();
        let b = run(&inst, &fam, &cfg, &mut RandomStream::new(42, 7), TraceLevel::Steps).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recorded_samples_have_expected_shape() {
        let inst = BanditInstance::bernoulli(&[0.1, 0.9]).unwrap();
        let fam = SuperArmFamily::singletons(2).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap();
        let out = run(&inst, &fam, &cfg, &mut RandomStream::new(5, 1), TraceLevel::Samples).unwrap();
        for s in &out.trace.unwrap().steps {
            let samples = s.samples.as_ref().unwrap();
            assert_eq!(samples.len() as u64, s.record.num_samples * 2);
        }
    }

    #[test]
    fn mismatched_environment_rejected() {
        let inst = BanditInstance::bernoulli(&[0.1, 0.9, 0.5]).unwrap();
        let fam = SuperArmFamily::singletons(2).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap();
        assert!(run(&inst, &fam, &cfg, &mut RandomStream::new(0, 0), TraceLevel::Off).is_err());
    }

    #[test]
    fn explicit_path_matches_generic_oracle() {
        let inst = BanditInstance::bernoulli(&[0.7, 0.5, 0.4]).unwrap();
        let listed = SuperArmFamily::singletons(3).unwrap();
        let top1 = SuperArmFamily::top_k(3, 1).unwrap();
        for seed in 0..5 {
            let a = run(
                &inst,
                &listed,
                &TsConfig::for_family(0.1, 0.1, &listed).unwrap(),
                &mut RandomStream::new(seed, 3),
                TraceLevel::Steps,
            )
            .unwrap();
            let b = run(
                &inst,
                &top1,
                &TsConfig::for_family(0.1, 0.1, &top1).unwrap(),
                &mut RandomStream::new(seed, 3),
                TraceLevel::Steps,
            )
            .unwrap();
            assert_eq!(a.output, b.output);
            assert_eq!(a.complexity, b.complexity);
            let (ta, tb) = (a.trace.unwrap(), b.trace.unwrap());
            for (x, y) in ta.steps.iter().zip(&tb.steps) {
                assert_eq!(x.record, y.record);
            }
        }
    }
}
