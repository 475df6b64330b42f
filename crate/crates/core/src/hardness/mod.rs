//! Hardness quantities, the complexity-bound reference, and run monitors.
//!
//! * `H_m = sum_i 1 / Delta_{i,m}^2` for classic bandits.
//! * `H_1 = width * sum_i 1 / Delta_{i,c}^2`, `H_2 = width^2 * sum_i 1 / Delta_{i,c}^2`.
//! * `H_0`: optimal value of `min sum_i N_i` s.t.
//!   `sum_{i in S* xor S} 1 / N_i <= Delta_{S*,S}^2` for every `S != S*`.
//!
//! Arms whose gap is infinite (no competing super arm separates them from
//! `S*`) contribute nothing to any of these sums.

mod barrier;
pub mod monitor;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{gap_profile, BanditInstance, GapProfile};
use crate::structures::{tie_tol, width_of, FamilyKind, SuperArmFamily};
use crate::{Error, Result};

pub use monitor::{
    check_events, check_pull_bound, difference_family, EventReport, EventViolation,
    PullBoundViolation,
};
pub use crate::tsexplore::{RunTrace, TraceStep};

/// Default relative duality-gap tolerance of the `H_0` solver.
pub const H0_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessReport {
    pub width: usize,
    pub h1: f64,
    pub h2: f64,
    pub h0: f64,
    /// Optimal `N*_i`; zero for arms that appear in no constraint.
    pub h0_allocation: Vec<f64>,
    /// Only for singleton families.
    pub h_m: Option<f64>,
}

/// `sum_i 1 / Delta_{i,m}^2`, where the best arm's gap is to the runner-up.
pub fn h_mab(means: &[f64]) -> Result<f64> {
    if means.len() < 2 {
        return Err(Error::Degenerate("need at least two arms".into()));
    }
    let (best, &top) = means
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let second = means
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if top - second <= tie_tol(top) {
        return Err(Error::Degenerate(format!("best arm is not unique ({top})")));
    }
    Ok(means
        .iter()
        .enumerate()
        .map(|(i, &mu)| {
            let gap = if i == best { top - second } else { top - mu };
            1.0 / (gap * gap)
        })
        .sum())
}

fn inverse_square_sum(gaps: &GapProfile) -> f64 {
    gaps.delta_arm
        .iter()
        .map(|&d| {
            let r = 1.0 / d;
            r * r
        })
        .sum()
}

/// `(H_1, H_2)`.
pub fn h1_h2(instance: &BanditInstance, family: &SuperArmFamily) -> Result<(f64, f64)> {
    let gaps = gap_profile(instance, family)?;
    let w = width_of(gaps.supers()) as f64;
    let s = inverse_square_sum(&gaps);
    Ok((w * s, w * w * s))
}

/// `H_0` and the optimal allocation `N*`, to relative duality gap `tol`.
///
/// Solved in `x_i = 1 / N_i`, where the constraints are linear, starting
/// inside the feasible region at half the point `x_i = Delta_{i,c}^2 / width`.
pub fn h0(instance: &BanditInstance, family: &SuperArmFamily, tol: f64) -> Result<(f64, Vec<f64>)> {
    let gaps = gap_profile(instance, family)?;
    h0_from_profile(&gaps, tol)
}

fn h0_from_profile(gaps: &GapProfile, tol: f64) -> Result<(f64, Vec<f64>)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let supers = gaps.supers();
    if supers.len() < 2 {
        return Err(Error::Degenerate("H0 needs at least two super arms".into()));
    }
    let m = gaps.delta_arm.len();
    let s_star = gaps.s_star();

    // variables only for arms that appear in some S* xor S
    let mut var_of = vec![usize::MAX; m];
    let mut arms = Vec::new();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for s in supers.iter().filter(|s| *s != s_star) {
        let d = gaps.delta_best(s).expect("enumerated");
        let mut row = Vec::new();
        for i in s_star.symmetric_difference(s) {
            if var_of[i] == usize::MAX {
                var_of[i] = arms.len();
                arms.push(i);
            }
            row.push(var_of[i]);
        }
        rows.push(row);
        rhs.push(d * d);
    }
    let width = width_of(supers) as f64;
    // Normalize so the largest right-hand side is 1.
    let scale = rhs.iter().copied().fold(0.0, f64::max);
    let rhs: Vec<f64> = rhs.into_iter().map(|b| b / scale).collect();
    let x0: Vec<f64> = arms
        .iter()
        .map(|&i| {
            let d = gaps.delta_arm[i];
            0.5 * d * d / width / scale
        })
        .collect();
    let program = barrier::Program {
        vars: arms.len(),
        rows,
        rhs,
    };
    let x = program.solve(x0, tol)?;
    let mut alloc = vec![0.0; m];
    let mut value = 0.0;
    for (&i, &xi) in arms.iter().zip(&x) {
        let n = 1.0 / (xi * scale);
        alloc[i] = n;
        value += n;
    }
    Ok((value, alloc))
}

/// `width`, `H_1`, `H_2`, `H_0` (with allocation) and `H_m` for singleton families.
pub fn hardness_report(instance: &BanditInstance, family: &SuperArmFamily) -> Result<HardnessReport> {
    let gaps = gap_profile(instance, family)?;
    let width = width_of(gaps.supers());
    let s = inverse_square_sum(&gaps);
    let (h0, h0_allocation) = h0_from_profile(&gaps, H0_TOL)?;
    let h_m = if is_singletons(family) {
        Some(h_mab(instance.true_means())?)
    } else {
        None
    };
    Ok(HardnessReport {
        width,
        h1: width as f64 * s,
        h2: (width * width) as f64 * s,
        h0,
        h0_allocation,
        h_m,
    })
}

fn is_singletons(family: &SuperArmFamily) -> bool {
    match family.kind() {
        FamilyKind::Explicit(s) => {
            s.len() == family.num_arms() && s.iter().all(|x| x.len() == 1)
        }
        FamilyKind::TopK(1) => true,
        _ => false,
    }
}

/// Order-of-magnitude reference for the sample complexity, constants set to 1:
///
/// `H1 (ln(1/delta) + ln(|I| H1)) ln(1/delta) / ln(1/q) + H1 ln^2(|I| H1) / ln(1/q)`
pub fn theoretical_bound(h1: f64, family_size: f64, delta: f64, q: f64) -> f64 {
    let ld = libm::log(1.0 / delta);
    let lq = libm::log(1.0 / q);
    let li = libm::log(family_size * h1);
    h1 * (ld + li) * ld / lq + h1 * li * li / lq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::ArmSet;
    use alloc::vec::Vec;

    fn problem(n: usize) -> (BanditInstance, SuperArmFamily) {
        let means: Vec<f64> = (0..2 * n).map(|i| if i < n { 0.1 } else { 0.9 }).collect();
        (
            BanditInstance::bernoulli(&means).unwrap(),
            SuperArmFamily::explicit(2 * n, [(0..n).collect::<Vec<_>>(), (n..2 * n).collect()])
                .unwrap(),
        )
    }

    #[test]
    fn h_mab_values() {
        assert!((h_mab(&[0.9, 0.1]).unwrap() - 3.125).abs() < 1e-12);
        assert!((h_mab(&[1.0, 0.0, 0.0]).unwrap() - 3.0).abs() < 1e-12);
        assert!(h_mab(&[0.4, 0.4, 0.1]).is_err());
        // direct definition
        let mu = [0.3, 0.75, 0.5, 0.1, 0.6, 0.72];
        let expect: f64 = [0.45, 0.03, 0.25, 0.65, 0.15, 0.03]
            .iter()
            .map(|d: &f64| 1.0 / (d * d))
            .sum();
        assert!((h_mab(&mu).unwrap() - expect).abs() < 1e-6 * expect);
    }

    #[test]
    fn problem_hardness() {
        for n in [1, 2, 4, 8, 16] {
            let (inst, fam) = problem(n);
            let (h1, h2) = h1_h2(&inst, &fam).unwrap();
            assert!((h1 - 6.25).abs() < 1e-9, "{h1}");
            assert!((h2 - 12.5 * n as f64).abs() < 1e-9, "{h2}");
            let (h0v, alloc) = h0(&inst, &fam, H0_TOL).unwrap();
            assert!((h0v - 6.25).abs() < 1e-3, "{h0v}");
            assert_eq!(alloc.len(), 2 * n);
        }
    }

    #[test]
    fn singleton_pair() {
        let inst = BanditInstance::bernoulli(&[0.9, 0.1]).unwrap();
        let fam = SuperArmFamily::singletons(2).unwrap();
        let (h1, _) = h1_h2(&inst, &fam).unwrap();
        assert!((h1 - 6.25).abs() < 1e-12);
        let (v, alloc) = h0(&inst, &fam, 1e-9).unwrap();
        assert!((v - 6.25).abs() < 1e-6);
        // N* = 1 / 0.32
        for a in alloc {
            assert!((a - 3.125).abs() < 1e-4);
        }
        let rep = hardness_report(&inst, &fam).unwrap();
        assert!((rep.h_m.unwrap() - 3.125).abs() < 1e-12);
        assert_eq!(rep.width, 2);
    }

    #[test]
    fn halving_gaps_quadruples_h0() {
        // halving every mean halves every gap
        let wide = [0.9, 0.1, 0.6, 0.3, 0.5];
        let narrow: Vec<f64> = wide.iter().map(|m| m / 2.0).collect();
        let fam = SuperArmFamily::explicit(5, [vec![0, 2], vec![1, 3], vec![0, 4], vec![2, 3, 4]])
            .unwrap();
        let a = h0(&BanditInstance::bernoulli(&wide).unwrap(), &fam, 1e-10).unwrap().0;
        let b = h0(&BanditInstance::bernoulli(&narrow).unwrap(), &fam, 1e-10).unwrap().0;
        assert!((b / a - 4.0).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn h0_single_super_arm_is_degenerate() {
        let inst = BanditInstance::bernoulli(&[0.9, 0.1]).unwrap();
        let fam = SuperArmFamily::explicit(2, [[0]]).unwrap();
        assert!(matches!(h0(&inst, &fam, 1e-6), Err(Error::Degenerate(_))));
    }

    #[test]
    fn h0_allocation_is_feasible() {
        let inst = BanditInstance::bernoulli(&[0.9, 0.2, 0.6, 0.3, 0.55, 0.1]).unwrap();
        let fam =
            SuperArmFamily::explicit(6, [vec![0, 2], vec![1, 3], vec![0, 4], vec![2, 3, 4], vec![5]])
                .unwrap();
        let tol = 1e-6;
        let (v, alloc) = h0(&inst, &fam, tol).unwrap();
        let g = gap_profile(&inst, &fam).unwrap();
        for s in g.supers().iter().filter(|s| *s != g.s_star()) {
            let d = g.delta_best(s).unwrap();
            let lhs: f64 = g.s_star().symmetric_difference(s).map(|i| 1.0 / alloc[i]).sum();
            assert!(lhs <= d * d * (1.0 + tol), "{lhs} > {}", d * d);
        }
        let (h1, h2) = h1_h2(&inst, &fam).unwrap();
        assert!(v <= h1 + 1e-6 && h1 <= h2);
        // The point N_i = width / Delta^2 is feasible
        let w = width_of(g.supers()) as f64;
        for s in g.supers().iter().filter(|s| *s != g.s_star()) {
            let d = g.delta_best(s).unwrap();
            let lhs: f64 = g
                .s_star()
                .symmetric_difference(s)
                .map(|i| g.delta_arm[i] * g.delta_arm[i] / w)
                .sum();
            assert!(lhs <= d * d * (1.0 + 1e-12));
        }
        let _ = ArmSet::new();
    }

    #[test]
    fn bound_values() {
        let v = theoretical_bound(6.25, 2.0, 1e-3, 1e-3);
        assert!((v - 64.73).abs() < 0.05, "{v}");
        let ld = libm::log(1e3);
        let li = libm::log(12.5);
        let first = 6.25 * (ld + li);
        assert!((v - (first + 6.25 * li * li / ld)).abs() < 1e-9);
    }
}
