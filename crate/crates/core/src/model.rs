//! Bandit instances, per-arm statistics and reward gaps.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::sampler::RandomStream;
use crate::structures::{compensated_sum, tie_tol, ArmSet, SuperArmFamily};
use crate::{Error, Result};

/// Reward distribution of one base arm. All variants are supported on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    Bernoulli { p: f64 },
}

impl Distribution {
    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Bernoulli { p } => p,
        }
    }

    fn sample(&self, rng: &mut RandomStream) -> f64 {
        match *self {
            // uniform() is in [0, 1), so p = 1 always yields 1 and p = 0 never does.
            Distribution::Bernoulli { p } => {
                if rng.uniform() < p {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// What a policy is allowed to see of the world: the arm count and a way to
/// pull. True means are deliberately absent.
pub trait Environment {
    fn num_arms(&self) -> usize;

    fn pull(&self, arm: usize, rng: &mut RandomStream) -> Result<f64>;
}

/// Base arms with known reward distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    dists: Vec<Distribution>,
    means: Vec<f64>,
}

impl BanditInstance {
    pub fn new(dists: Vec<Distribution>) -> Result<Self> {
        if dists.is_empty() {
            return Err(Error::InvalidInstance("instance needs at least one arm".into()));
        }
        for (i, d) in dists.iter().enumerate() {
            let mu = d.mean();
            if !(0.0..=1.0).contains(&mu) {
                return Err(Error::InvalidInstance(format!(
                    "arm {i} has mean {mu} outside [0, 1]"
                )));
            }
        }
        let means = dists.iter().map(Distribution::mean).collect();
        Ok(Self { dists, means })
    }

    pub fn bernoulli(means: &[f64]) -> Result<Self> {
        Self::new(means.iter().map(|&p| Distribution::Bernoulli { p }).collect())
    }

    pub fn distributions(&self) -> &[Distribution] {
        &self.dists
    }

    /// True means. Used by the harness and the monitors, never by policies.
    pub fn true_means(&self) -> &[f64] {
        &self.means
    }
}

impl Environment for BanditInstance {
    fn num_arms(&self) -> usize {
        self.dists.len()
    }

    fn pull(&self, arm: usize, rng: &mut RandomStream) -> Result<f64> {
        pull(self, arm, rng)
    }
}

/// One reward from arm `arm`.
pub fn pull(instance: &BanditInstance, arm: usize, rng: &mut RandomStream) -> Result<f64> {
    let d = instance.dists.get(arm).ok_or(Error::ArmOutOfRange {
        arm,
        m: instance.dists.len(),
    })?;
    Ok(d.sample(rng))
}

/// Per-arm observation counts `N_i`, reward sums `R_i`, and the step counter `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmStats {
    n: Vec<u64>,
    r: Vec<f64>,
    t: u64,
}

impl ArmStats {
    pub fn new(m: usize) -> Self {
        Self {
            n: vec![0; m],
            r: vec![0.0; m],
            t: 0,
        }
    }

    /// Stats with given counts and sums; `t` is set to `m`.
    pub fn from_parts(n: Vec<u64>, r: Vec<f64>) -> Result<Self> {
        if n.len() != r.len() {
            return Err(Error::InvalidParameter("counts and sums differ in length".into()));
        }
        for (i, (&ni, &ri)) in n.iter().zip(&r).enumerate() {
            if !(ri >= 0.0 && ri <= ni as f64) {
                return Err(Error::InvalidParameter(format!(
                    "arm {i}: reward sum {ri} not in [0, {ni}]"
                )));
            }
        }
        let t = n.len() as u64;
        Ok(Self { n, r, t })
    }

    pub fn num_arms(&self) -> usize {
        self.n.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.n
    }

    pub fn sums(&self) -> &[f64] {
        &self.r
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.n[arm]
    }

    /// Total observations `Z = sum_i N_i`.
    pub fn total(&self) -> u64 {
        self.n.iter().sum()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn set_t(&mut self, t: u64) {
        self.t = t;
    }

    /// Advance the step counter by one and return the new value.
    pub fn tick(&mut self) -> u64 {
        self.t += 1;
        self.t
    }

    /// Record one observation. Does not touch `t`.
    pub fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        if arm >= self.n.len() {
            return Err(Error::ArmOutOfRange {
                arm,
                m: self.n.len(),
            });
        }
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::RewardOutOfRange(reward));
        }
        self.n[arm] += 1;
        self.r[arm] += reward;
        Ok(())
    }

    pub fn is_initialized(&self) -> bool {
        self.n.iter().all(|&n| n > 0)
    }

    pub(crate) fn check_initialized(&self) -> Result<()> {
        match self.n.iter().position(|&n| n == 0) {
            Some(i) => Err(Error::Unobserved(i)),
            None => Ok(()),
        }
    }

    /// `R_i / N_i` for every arm.
    pub fn empirical_means(&self) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n.len()];
        self.empirical_means_into(&mut out)?;
        Ok(out)
    }

    pub fn empirical_means_into(&self, out: &mut [f64]) -> Result<()> {
        self.check_initialized()?;
        for ((o, &n), &r) in out.iter_mut().zip(&self.n).zip(&self.r) {
            *o = r / n as f64;
        }
        Ok(())
    }
}

/// Free-function form of [`ArmStats::empirical_means`].
pub fn empirical_means(stats: &ArmStats) -> Result<Vec<f64>> {
    stats.empirical_means()
}

/// Free-function form of [`ArmStats::update`].
pub fn update(mut stats: ArmStats, arm: usize, reward: f64) -> Result<ArmStats> {
    stats.update(arm, reward)?;
    Ok(stats)
}

/// Reward gaps of an instance under an enumerated family.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    s_star: ArmSet,
    supers: Vec<ArmSet>,
    values: Vec<f64>,
    best_value: f64,
    /// Per-arm gap. `f64::INFINITY` when no competing super arm exists for
    /// the arm (it is in every super arm, or in none).
    pub delta_arm: Vec<f64>,
}

impl GapProfile {
    /// The optimal super arm.
    pub fn s_star(&self) -> &ArmSet {
        &self.s_star
    }

    pub fn supers(&self) -> &[ArmSet] {
        &self.supers
    }

    /// `sum_{S*} mu - sum_{S} mu`, or `None` if `s` is not in the family.
    pub fn delta_best(&self, s: &ArmSet) -> Option<f64> {
        let idx = self.supers.binary_search(s).ok()?;
        if self.supers[idx] == self.s_star {
            return Some(0.0);
        }
        Some(self.best_value - self.values[idx])
    }
}

/// Computes `S*` and the per-arm gaps by exhaustive search over the family.
///
/// For `i` in `S*` the gap is to the best super arm without `i`; for `i`
/// outside `S*` it is to the best super arm containing `i`.
pub fn gap_profile(instance: &BanditInstance, family: &SuperArmFamily) -> Result<GapProfile> {
    gap_profile_for_means(instance.true_means(), family)
}

pub fn gap_profile_for_means(means: &[f64], family: &SuperArmFamily) -> Result<GapProfile> {
    let m = family.num_arms();
    if means.len() != m {
        return Err(Error::WeightLength {
            got: means.len(),
            expected: m,
        });
    }
    let supers = family.enumerate()?;
    let values: Vec<f64> = supers
        .iter()
        .map(|s| compensated_sum(s.iter().map(|i| means[i])))
        .collect();
    let (star, &best_value) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("families are nonempty");
    let tol = tie_tol(best_value);
    if let Some((other, _)) = values
        .iter()
        .enumerate()
        .find(|&(k, &v)| k != star && v >= best_value - tol)
    {
        return Err(Error::Degenerate(format!(
            "optimal super arm is not unique: {} and {}",
            supers[star], supers[other]
        )));
    }
    let s_star = supers[star].clone();

    let mut delta_arm = vec![f64::INFINITY; m];
    for (i, d) in delta_arm.iter_mut().enumerate() {
        let in_star = s_star.contains(i);
        let rival = supers
            .iter()
            .zip(&values)
            .filter(|(s, _)| s.contains(i) != in_star)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        if rival > f64::NEG_INFINITY {
            *d = best_value - rival;
        }
    }
    Ok(GapProfile {
        s_star,
        supers,
        values,
        best_value,
        delta_arm,
    })
}
