//! Comparison policies sharing the run contract of [`crate::tsexplore::run`].
//!
//! `CLUCB` here is a reconstruction: Hoeffding radii with a `4 m t^3 / delta`
//! union bound, the empirical best super arm penalized by its radii and every
//! other arm boosted by theirs. Its constants are not meant to match any
//! published table; only its scaling matters.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{ArmStats, Environment};
use crate::sampler::RandomStream;
use crate::structures::{tie_tol, ArmSet, OracleWorkspace, SuperArmFamily};
use crate::tsexplore::{check_arms, initialize, Decision, RunOutcome, DEFAULT_MAX_PULLS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClucbConfig {
    delta: f64,
    max_pulls: u64,
}

impl ClucbConfig {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must be in (0, 1), got {delta}")));
        }
        Ok(Self {
            delta,
            max_pulls: DEFAULT_MAX_PULLS,
        })
    }

    pub fn with_max_pulls(mut self, max_pulls: u64) -> Self {
        self.max_pulls = max_pulls;
        self
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn max_pulls(&self) -> u64 {
        self.max_pulls
    }
}

/// `sqrt(ln(4 m t^3 / delta) / (2 n_i))`
pub fn clucb_radius(delta: f64, m: usize, t: u64, n_i: u64) -> f64 {
    let log = libm::log(4.0 * m as f64) + 3.0 * libm::log(t as f64) - libm::log(delta);
    libm::sqrt(log / (2.0 * n_i as f64))
}

/// One CLUCB decision at step `stats.t()`.
pub fn clucb_step(stats: &ArmStats, family: &SuperArmFamily, cfg: &ClucbConfig) -> Result<Decision> {
    let m = stats.num_arms();
    let radii: Vec<f64> = stats
        .counts()
        .iter()
        .map(|&n| clucb_radius(cfg.delta, m, stats.t().max(1), n.max(1)))
        .collect();
    Clucb::new(family).decide(stats, &radii)
}

/// Reusable buffers for CLUCB decisions.
struct Clucb<'f> {
    family: &'f SuperArmFamily,
    means: Vec<f64>,
    adjusted: Vec<f64>,
    s_hat: ArmSet,
    s_tilde: ArmSet,
    ws: OracleWorkspace,
}

impl<'f> Clucb<'f> {
    fn new(family: &'f SuperArmFamily) -> Self {
        let m = family.num_arms();
        Self {
            family,
            means: vec![0.0; m],
            adjusted: vec![0.0; m],
            s_hat: ArmSet::with_capacity(m),
            s_tilde: ArmSet::with_capacity(m),
            ws: OracleWorkspace::default(),
        }
    }

    /// Decision for given per-arm radii.
    fn decide(&mut self, stats: &ArmStats, radii: &[f64]) -> Result<Decision> {
        stats.empirical_means_into(&mut self.means)?;
        self.family.oracle_into(&self.means, &mut self.ws, &mut self.s_hat)?;
        for (i, a) in self.adjusted.iter_mut().enumerate() {
            *a = if self.s_hat.contains(i) {
                self.means[i] - radii[i]
            } else {
                self.means[i] + radii[i]
            };
        }
        self.family
            .oracle_into(&self.adjusted, &mut self.ws, &mut self.s_tilde)?;
        let v_tilde = self.s_tilde.value(&self.adjusted);
        let v_hat = self.s_hat.value(&self.adjusted);
        if self.s_tilde == self.s_hat || v_tilde - v_hat <= tie_tol(v_tilde) {
            return Ok(Decision::Output(self.s_hat.clone()));
        }
        let arm = self
            .s_hat
            .symmetric_difference(&self.s_tilde)
            .max_by(|&a, &b| radii[a].total_cmp(&radii[b]).then(b.cmp(&a)))
            .expect("distinct sets");
        Ok(Decision::Pull(arm))
    }
}

/// Runs CLUCB to completion or until the pull budget is spent.
pub fn run_clucb<E: Environment + ?Sized>(
    env: &E,
    family: &SuperArmFamily,
    cfg: &ClucbConfig,
    rng: &mut RandomStream,
) -> Result<RunOutcome> {
    check_arms(env, family)?;
    let m = env.num_arms();
    let mut stats = ArmStats::new(m);
    let mut out = RunOutcome {
        output: None,
        complexity: 0,
        terminated: false,
        decisions: 0,
        trace: None,
    };
    if initialize(env, &mut stats, rng, cfg.max_pulls)? {
        let mut policy = Clucb::new(family);
        let mut radii = vec![0.0; m];
        loop {
            let t = stats.tick();
            for (r, &n) in radii.iter_mut().zip(stats.counts()) {
                *r = clucb_radius(cfg.delta, m, t, n);
            }
            out.decisions += 1;
            match policy.decide(&stats, &radii)? {
                Decision::Output(s) => {
                    out.output = Some(s);
                    out.terminated = true;
                    break;
                }
                Decision::Pull(arm) => {
                    if stats.total() >= cfg.max_pulls {
                        break;
                    }
                    let r = env.pull(arm, rng)?;
                    stats.update(arm, r)?;
                }
            }
        }
    }
    out.complexity = stats.total();
    Ok(out)
}

/// Uniform allocation: full rounds over all arms, CLUCB's stopping test
/// checked before each round. Complexity is always a multiple of `m`.
pub fn run_roundrobin<E: Environment + ?Sized>(
    env: &E,
    family: &SuperArmFamily,
    cfg: &ClucbConfig,
    rng: &mut RandomStream,
) -> Result<RunOutcome> {
    check_arms(env, family)?;
    let m = env.num_arms();
    let mut stats = ArmStats::new(m);
    let mut out = RunOutcome {
        output: None,
        complexity: 0,
        terminated: false,
        decisions: 0,
        trace: None,
    };
    if initialize(env, &mut stats, rng, cfg.max_pulls)? {
        let mut policy = Clucb::new(family);
        let mut radii = vec![0.0; m];
        'rounds: loop {
            let t = stats.t().max(1);
            for (r, &n) in radii.iter_mut().zip(stats.counts()) {
                *r = clucb_radius(cfg.delta, m, t, n);
            }
            out.decisions += 1;
            if let Decision::Output(s) = policy.decide(&stats, &radii)? {
                out.output = Some(s);
                out.terminated = true;
                break;
            }
            for arm in 0..m {
                if stats.total() >= cfg.max_pulls {
                    break 'rounds;
                }
                let r = env.pull(arm, rng)?;
                stats.update(arm, r)?;
                stats.tick();
            }
        }
    }
    out.complexity = stats.total();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BanditInstance;

    #[test]
    fn radius_values() {
        let r = clucb_radius(0.1, 2, 20, 10);
        assert!((r - libm::sqrt(libm::log(640_000.0) / 20.0)).abs() < 1e-12);
        assert!((r - 0.8176).abs() < 1e-3, "{r}");
        assert!((clucb_radius(0.1, 2, 20, 40) - r / 2.0).abs() < 1e-12);
        assert!(clucb_radius(0.1, 2, 21, 10) > r);
    }

    #[test]
    fn step_example() {
        let fam = SuperArmFamily::singletons(2).unwrap();
        let mut stats = ArmStats::from_parts(vec![10, 10], vec![9.0, 1.0]).unwrap();
        stats.set_t(20);
        let cfg = ClucbConfig::new(0.1).unwrap();
        assert_eq!(clucb_step(&stats, &fam, &cfg).unwrap(), Decision::Pull(0));

        let mut c = Clucb::new(&fam);
        let r = clucb_radius(0.1, 2, 20, 10);
        c.decide(&stats, &[r, r]).unwrap();
        assert!((c.adjusted[0] - (0.9 - r)).abs() < 1e-12 && (c.adjusted[0] - 0.0824).abs() < 1e-3);
        assert!((c.adjusted[1] - 0.9176).abs() < 1e-3);
        assert_eq!(c.s_tilde, [1].into());
    }

    #[test]
    fn zero_radii_output() {
        let fam = SuperArmFamily::explicit(4, [[0, 1], [2, 3]]).unwrap();
        let stats = ArmStats::from_parts(vec![3, 3, 3, 3], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let d = Clucb::new(&fam).decide(&stats, &[0.0; 4]).unwrap();
        assert_eq!(d, Decision::Output([2, 3].into()));
    }

    #[test]
    fn single_super_arm_outputs() {
        let fam = SuperArmFamily::explicit(2, [[1]]).unwrap();
        let mut stats = ArmStats::from_parts(vec![1, 1], vec![1.0, 0.0]).unwrap();
        stats.set_t(3);
        let d = clucb_step(&stats, &fam, &ClucbConfig::new(0.01).unwrap()).unwrap();
        assert_eq!(d, Decision::Output([1].into()));
    }

    #[test]
    fn deterministic_instance() {
        let inst = BanditInstance::bernoulli(&[1.0, 0.0]).unwrap();
        let fam = SuperArmFamily::singletons(2).unwrap();
        let cfg = ClucbConfig::new(0.1).unwrap();
        let a = run_clucb(&inst, &fam, &cfg, &mut RandomStream::new(1, 1)).unwrap();
        assert_eq!(a.output, Some([0].into()));
        let b = run_clucb(&inst, &fam, &cfg, &mut RandomStream::new(1, 1)).unwrap();
        assert_eq!(a, b);
        let rr = run_roundrobin(&inst, &fam, &cfg, &mut RandomStream::new(1, 1)).unwrap();
        assert!(rr.terminated);
        assert_eq!(rr.output, Some([0].into()));
        assert_eq!(rr.complexity % 2, 0);
    }

    #[test]
    fn roundrobin_complexity_is_multiple_of_m() {
        let inst = BanditInstance::bernoulli(&[0.1, 0.1, 0.1, 0.9, 0.9, 0.9]).unwrap();
        let fam = SuperArmFamily::explicit(6, [[0, 1, 2], [3, 4, 5]]).unwrap();
        let cfg = ClucbConfig::new(0.05).unwrap();
        for seed in 0..5 {
            let rr = run_roundrobin(&inst, &fam, &cfg, &mut RandomStream::new(seed, 0)).unwrap();
            assert!(rr.terminated);
            assert_eq!(rr.complexity % 6, 0);
        }
    }

    #[test]
    fn budget_exhaustion() {
        let inst = BanditInstance::bernoulli(&[0.5, 0.45]).unwrap();
        let fam = SuperArmFamily::singletons(2).unwrap();
        let cfg = ClucbConfig::new(0.1).unwrap().with_max_pulls(7);
        let out = run_clucb(&inst, &fam, &cfg, &mut RandomStream::new(0, 0)).unwrap();
        assert!(!out.terminated && out.complexity == 7);
        let out = run_roundrobin(&inst, &fam, &cfg, &mut RandomStream::new(0, 0)).unwrap();
        assert!(!out.terminated && out.complexity == 7);
    }
}
