//! Checks of the concentration events and the per-arm pull bound over a
//! recorded run.
//!
//! For the family `J = { S \ S' : S, S' in I } \ {empty}`, at each step `t`:
//!
//! * `E0`: `|sum_U (mu_hat - mu)| <= sqrt(sum_U 1/(2 N_i) * L1(t))` for all `U` in `J`.
//! * `E1`: `|sum_U (theta^k - mu_hat)| <= sqrt(sum_U 2 C(t)/N_i * L2(t))` for all `U`, `k`.
//! * `E2`: for every ordered pair `(S, S')` some `k` has
//!   `sum_S theta^k - sum_S' theta^k >= sum_S mu - sum_S' mu`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{gap_profile, BanditInstance};
use crate::structures::{width_of, ArmSet, SuperArmFamily};
use crate::tsexplore::{Decision, RunTrace};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EventViolation {
    E0 {
        t: u64,
        set: ArmSet,
        deviation: f64,
        radius: f64,
    },
    E1 {
        t: u64,
        k: u64,
        set: ArmSet,
        deviation: f64,
        radius: f64,
    },
    E2 {
        t: u64,
        better: ArmSet,
        worse: ArmSet,
        true_gap: f64,
        best_sampled_gap: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub steps: usize,
    pub e0_violations: Vec<EventViolation>,
    pub e1_violations: Vec<EventViolation>,
    pub e2_violations: Vec<EventViolation>,
}

impl EventReport {
    pub fn e0_holds(&self) -> bool {
        self.e0_violations.is_empty()
    }

    pub fn e1_holds(&self) -> bool {
        self.e1_violations.is_empty()
    }

    pub fn e2_holds(&self) -> bool {
        self.e2_violations.is_empty()
    }

    pub fn all_hold(&self) -> bool {
        self.e0_holds() && self.e1_holds() && self.e2_holds()
    }
}

/// Differences `S \ S'` over all pairs, deduplicated, empties dropped.
pub fn difference_family(supers: &[ArmSet]) -> Vec<ArmSet> {
    let mut out = BTreeSet::new();
    for a in supers {
        for b in supers {
            let d: ArmSet = a.difference(b).collect();
            if !d.is_empty() {
                out.insert(d);
            }
        }
    }
    out.into_iter().collect()
}

/// Evaluates `E0`, `E1` and `E2` at every recorded step.
///
/// The trace must carry sample vectors (`TraceLevel::Samples`).
pub fn check_events(
    trace: &RunTrace,
    instance: &BanditInstance,
    family: &SuperArmFamily,
) -> Result<EventReport> {
    let supers = family.enumerate()?;
    let mu = instance.true_means();
    if mu.len() != family.num_arms() {
        return Err(Error::WeightLength {
            got: mu.len(),
            expected: family.num_arms(),
        });
    }
    let sets = difference_family(&supers);
    let true_values: Vec<f64> = supers.iter().map(|s| s.value(mu)).collect();
    let cfg = &trace.config;
    let mut report = EventReport {
        steps: trace.steps.len(),
        ..EventReport::default()
    };
    let mut sampled = vec![0.0; supers.len()];
    let mut best_gap = vec![f64::NEG_INFINITY; supers.len() * supers.len()];

    for step in &trace.steps {
        let t = step.t();
        let n = &step.counts;
        let mu_hat = step.empirical_means();
        let l1 = cfg.l1(t);
        let l2 = cfg.l2(t);
        let c = cfg.scale(t);

        for u in &sets {
            let dev: f64 = u.iter().map(|i| mu_hat[i] - mu[i]).sum();
            let rad = libm::sqrt(u.iter().map(|i| 0.5 / n[i] as f64).sum::<f64>() * l1);
            if dev.abs() > rad {
                report.e0_violations.push(EventViolation::E0 {
                    t,
                    set: u.clone(),
                    deviation: dev,
                    radius: rad,
                });
            }
        }

        let num = step.record.num_samples;
        if num == 0 {
            continue;
        }
        if step.samples.is_none() {
            return Err(Error::MissingSamples);
        }
        let radii: Vec<f64> = sets
            .iter()
            .map(|u| libm::sqrt(u.iter().map(|i| 2.0 * c / n[i] as f64).sum::<f64>() * l2))
            .collect();
        best_gap.iter_mut().for_each(|g| *g = f64::NEG_INFINITY);
        for k in 0..num {
            let theta = step.sample(k as usize).ok_or(Error::MissingSamples)?;
            for (u, &rad) in sets.iter().zip(&radii) {
                let dev: f64 = u.iter().map(|i| theta[i] - mu_hat[i]).sum();
                if dev.abs() > rad {
                    report.e1_violations.push(EventViolation::E1 {
                        t,
                        k,
                        set: u.clone(),
                        deviation: dev,
                        radius: rad,
                    });
                }
            }
            for (v, s) in sampled.iter_mut().zip(&supers) {
                *v = s.value(theta);
            }
            let p = supers.len();
            for a in 0..p {
                for b in 0..p {
                    let g = &mut best_gap[a * p + b];
                    *g = g.max(sampled[a] - sampled[b]);
                }
            }
        }
        let p = supers.len();
        for a in 0..p {
            for b in 0..p {
                if a == b {
                    continue;
                }
                let true_gap = true_values[a] - true_values[b];
                if best_gap[a * p + b] < true_gap {
                    report.e2_violations.push(EventViolation::E2 {
                        t,
                        better: supers[a].clone(),
                        worse: supers[b].clone(),
                        true_gap,
                        best_sampled_gap: best_gap[a * p + b],
                    });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullBoundViolation {
    pub t: u64,
    pub arm: usize,
    pub count: u64,
    pub threshold: f64,
}

/// Flags every pull of arm `i` made while `N_i(t) >= 98 width C(t) L2(t) / Delta_{i,c}^2`.
pub fn check_pull_bound(
    trace: &RunTrace,
    instance: &BanditInstance,
    family: &SuperArmFamily,
) -> Result<Vec<PullBoundViolation>> {
    let gaps = gap_profile(instance, family)?;
    let width = width_of(gaps.supers()) as f64;
    let cfg = &trace.config;
    let mut out = Vec::new();
    for step in &trace.steps {
        if let Decision::Pull(arm) = step.record.decision {
            let t = step.t();
            let d = gaps.delta_arm[arm];
            let threshold = 98.0 * width * cfg.scale(t) * cfg.l2(t) / (d * d);
            let count = step.counts[arm];
            if count as f64 >= threshold {
                out.push(PullBoundViolation {
                    t,
                    arm,
                    count,
                    threshold,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::RandomStream;
    use crate::tsexplore::{run, TraceLevel, TsConfig};

    #[test]
    fn differences() {
        let s: Vec<ArmSet> = vec![[0, 1].into(), [1, 2].into(), [3].into()];
        let j = difference_family(&s);
        let want: Vec<ArmSet> = vec![[0].into(), [0, 1].into(), [1, 2].into(), [2].into(), [3].into()];
        assert_eq!(j, want);
    }

    #[test]
    fn events_hold_on_easy_instance() {
        let inst = BanditInstance::bernoulli(&[0.9, 0.1]).unwrap();
        let fam = SuperArmFamily::singletons(2).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap();
        let out = run(&inst, &fam, &cfg, &mut RandomStream::new(5, 0), TraceLevel::Samples).unwrap();
        let trace = out.trace.unwrap();
        let rep = check_events(&trace, &inst, &fam).unwrap();
        assert_eq!(rep.steps, trace.steps.len());
        assert!(rep.e1_holds(), "{:?}", rep.e1_violations.first());
        assert!(check_pull_bound(&trace, &inst, &fam).unwrap().is_empty());
    }

    #[test]
    fn missing_samples() {
        let inst = BanditInstance::bernoulli(&[0.9, 0.1]).unwrap();
        let fam = SuperArmFamily::singletons(2).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap();
        let out = run(&inst, &fam, &cfg, &mut RandomStream::new(5, 0), TraceLevel::Steps).unwrap();
        assert_eq!(
            check_events(&out.trace.unwrap(), &inst, &fam),
            Err(Error::MissingSamples)
        );
    }

    #[test]
    fn e0_violation_detected() {
        use crate::tsexplore::{StepRecord, TraceStep};
        let fam = SuperArmFamily::singletons(2).unwrap();
        let inst = BanditInstance::bernoulli(&[0.9, 0.1]).unwrap();
        let cfg = TsConfig::for_family(0.1, 0.1, &fam).unwrap();
        // 1000 pulls of arm 0 all returning 0: far outside any radius
        let step = TraceStep {
            counts: vec![1000, 1000],
            sums: vec![0.0, 100.0],
            record: StepRecord {
                t: 2001,
                num_samples: 0,
                s_hat: [1].into(),
                k_star: None,
                gap: 0.0,
                s_tilde: None,
                decision: Decision::Output([1].into()),
            },
            samples: None,
        };
        let trace = RunTrace {
            config: cfg,
            steps: vec![step],
        };
        let rep = check_events(&trace, &inst, &fam).unwrap();
        assert!(!rep.e0_holds());
        assert!(rep.e1_holds() && rep.e2_holds());
    }
}
