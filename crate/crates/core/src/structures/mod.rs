//! Super-arm families and their offline oracles.
//!
//! A family is a set of super arms over `m` base arms. Every family can answer
//! `argmax_S sum_{i in S} w_i` for an arbitrary weight vector; small families
//! can also be enumerated, which the hardness calculators and monitors need.
//!
//! Oracle ties are broken towards the lexicographically smallest canonical
//! (sorted) arm set among the maximizers, so the same weights always give the
//! same super arm.

mod graph;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use graph::{Dag, Graph};

use crate::{Error, Result};

/// Default upper bound on the number of super arms [`SuperArmFamily::enumerate`] will produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000;

/// Tolerance used when comparing sums of weights for ties.
#[inline]
pub(crate) fn tie_tol(scale: f64) -> f64 {
    1e-12 * (1.0 + scale.abs())
}

/// A set of base-arm indices, stored sorted and deduplicated.
///
/// Ordering is lexicographic on the sorted index sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArmSet(Vec<usize>);

impl ArmSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn with_capacity(n: usize) -> Self {
        Self(Vec::with_capacity(n))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.0.binary_search(&arm).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Sum of `weights` over the members.
    #[inline]
    pub fn value(&self, weights: &[f64]) -> f64 {
        self.0.iter().map(|&i| weights[i]).sum()
    }

    /// Members of `self` that are not in `other`.
    pub fn difference<'a>(&'a self, other: &'a ArmSet) -> impl Iterator<Item = usize> + 'a {
        self.0.iter().copied().filter(move |&i| !other.contains(i))
    }

    /// Symmetric difference, in increasing order.
    pub fn symmetric_difference<'a>(&'a self, other: &'a ArmSet) -> SymmetricDifference<'a> {
        SymmetricDifference {
            a: &self.0,
            b: &other.0,
        }
    }

    pub fn symmetric_difference_len(&self, other: &ArmSet) -> usize {
        self.symmetric_difference(other).count()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    // Builders for the oracles: callers push in any order and then normalize.
    pub(crate) fn clear(&mut self) {
        self.0.clear();
    }

    pub(crate) fn push_unchecked(&mut self, arm: usize) {
        self.0.push(arm);
    }

    pub(crate) fn normalize(&mut self) {
        self.0.sort_unstable();
        self.0.dedup();
    }

    pub(crate) fn copy_from(&mut self, other: &ArmSet) {
        self.0.clear();
        self.0.extend_from_slice(&other.0);
    }
}

impl FromIterator<usize> for ArmSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ArmSet(iter.into_iter().collect());
        s.normalize();
        s
    }
}

impl From<Vec<usize>> for ArmSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl<const N: usize> From<[usize; N]> for ArmSet {
    fn from(v: [usize; N]) -> Self {
        v.into_iter().collect()
    }
}

impl fmt::Display for ArmSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// Merge-based symmetric difference of two sorted index lists.
pub struct SymmetricDifference<'a> {
    a: &'a [usize],
    b: &'a [usize],
}

impl Iterator for SymmetricDifference<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            match (self.a.first(), self.b.first()) {
                (None, None) => return None,
                (Some(&x), None) => {
                    self.a = &self.a[1..];
                    return Some(x);
                }
                (None, Some(&y)) => {
                    self.b = &self.b[1..];
                    return Some(y);
                }
                (Some(&x), Some(&y)) => {
                    if x < y {
                        self.a = &self.a[1..];
                        return Some(x);
                    } else if y < x {
                        self.b = &self.b[1..];
                        return Some(y);
                    } else {
                        self.a = &self.a[1..];
                        self.b = &self.b[1..];
                    }
                }
            }
        }
    }
}

/// The combinatorial structure a family is built from.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// An explicit list of super arms, canonical and deduplicated, sorted.
    Explicit(Vec<ArmSet>),
    /// All subsets of size `k`.
    TopK(usize),
    /// Spanning trees of a connected graph; base arm `i` is edge `i`.
    SpanningTree(Graph),
    /// Source-to-sink paths of a DAG; base arm `i` is edge `i`.
    DagPath(Dag),
}

/// A super-arm family over `m` base arms.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperArmFamily {
    m: usize,
    kind: FamilyKind,
}

impl SuperArmFamily {
    /// Explicit list of super arms. Sets are canonicalized and duplicates dropped.
    pub fn explicit<I, S>(m: usize, supers: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = usize>,
    {
        if m == 0 {
            return Err(Error::InvalidFamily("family needs at least one base arm".into()));
        }
        let mut set = BTreeSet::new();
        for s in supers {
            let s: ArmSet = s.into_iter().collect();
            if s.is_empty() {
                return Err(Error::InvalidFamily("super arms must be nonempty".into()));
            }
            if let Some(&bad) = s.as_slice().last().filter(|&&i| i >= m) {
                return Err(Error::InvalidFamily(format!(
                    "super arm {s} mentions arm {bad} but m = {m}"
                )));
            }
            set.insert(s);
        }
        if set.is_empty() {
            return Err(Error::InvalidFamily("family has no super arms".into()));
        }
        Ok(Self {
            m,
            kind: FamilyKind::Explicit(set.into_iter().collect()),
        })
    }

    /// Singleton super arms `{0}, {1}, ..., {m-1}`: the classic bandit.
    pub fn singletons(m: usize) -> Result<Self> {
        Self::explicit(m, (0..m).map(|i| [i]))
    }

    pub fn top_k(m: usize, k: usize) -> Result<Self> {
        if k == 0 || k > m {
            return Err(Error::InvalidFamily(format!("top-k needs 1 <= k <= m, got k={k}, m={m}")));
        }
        Ok(Self {
            m,
            kind: FamilyKind::TopK(k),
        })
    }

    pub fn spanning_tree(graph: Graph) -> Result<Self> {
        graph.validate_connected()?;
        Ok(Self {
            m: graph.num_edges(),
            kind: FamilyKind::SpanningTree(graph),
        })
    }

    pub fn dag_path(dag: Dag) -> Result<Self> {
        Ok(Self {
            m: dag.num_edges(),
            kind: FamilyKind::DagPath(dag),
        })
    }

    /// Number of base arms.
    pub fn num_arms(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    /// Best super arm under `weights`.
    pub fn oracle(&self, weights: &[f64]) -> Result<ArmSet> {
        let mut ws = OracleWorkspace::default();
        let mut out = ArmSet::with_capacity(self.m);
        self.oracle_into(weights, &mut ws, &mut out)?;
        Ok(out)
    }

    /// Allocation-free form of [`oracle`](Self::oracle) once `ws` and `out` are warm.
    pub fn oracle_into(
        &self,
        weights: &[f64],
        ws: &mut OracleWorkspace,
        out: &mut ArmSet,
    ) -> Result<()> {
        if weights.len() != self.m {
            return Err(Error::WeightLength {
                got: weights.len(),
                expected: self.m,
            });
        }
        out.clear();
        match &self.kind {
            FamilyKind::Explicit(supers) => {
                let idx = explicit_argmax(supers, weights, &mut ws.values);
                out.copy_from(&supers[idx]);
            }
            FamilyKind::TopK(k) => {
                let order = &mut ws.order;
                order.clear();
                order.extend(0..self.m);
                // Descending weight, ascending index on ties. For equal-size sets this
                // yields the lexicographically smallest maximizer.
                let cmp = |a: &usize, b: &usize| weights[*b].total_cmp(&weights[*a]).then(a.cmp(b));
                if *k < self.m {
                    order.select_nth_unstable_by(*k - 1, cmp);
                }
                for &i in &order[..*k] {
                    out.push_unchecked(i);
                }
                out.normalize();
            }
            FamilyKind::SpanningTree(g) => g.max_spanning_tree(weights, ws, out),
            FamilyKind::DagPath(d) => d.longest_path(weights, ws, out),
        }
        Ok(())
    }

    /// All super arms in canonical order, up to [`DEFAULT_ENUMERATION_CAP`].
    pub fn enumerate(&self) -> Result<Vec<ArmSet>> {
        self.enumerate_capped(DEFAULT_ENUMERATION_CAP)
    }

    /// All super arms in canonical order; fails with [`Error::TooLarge`] past `cap`.
    pub fn enumerate_capped(&self, cap: usize) -> Result<Vec<ArmSet>> {
        let mut all = match &self.kind {
            FamilyKind::Explicit(supers) => {
                if supers.len() > cap {
                    return Err(Error::TooLarge { cap });
                }
                supers.clone()
            }
            FamilyKind::TopK(k) => {
                if binomial_exceeds(self.m, *k, cap) {
                    return Err(Error::TooLarge { cap });
                }
                combinations(self.m, *k)
            }
            FamilyKind::SpanningTree(g) => g.enumerate_trees(cap)?,
            FamilyKind::DagPath(d) => d.enumerate_paths(cap)?,
        };
        all.sort();
        all.dedup();
        Ok(all)
    }

    /// `|I|` if the family can be enumerated under `cap`, else `2^m`.
    pub fn size_hint(&self, cap: usize) -> f64 {
        match self.exact_size(cap) {
            Some(n) => n as f64,
            None => libm::pow(2.0, self.m as f64),
        }
    }

    /// Exact family size when it is at most `cap`.
    pub fn exact_size(&self, cap: usize) -> Option<usize> {
        match &self.kind {
            FamilyKind::Explicit(s) => (s.len() <= cap).then_some(s.len()),
            FamilyKind::TopK(k) => {
                (!binomial_exceeds(self.m, *k, cap)).then(|| binomial(self.m, *k) as usize)
            }
            _ => self.enumerate_capped(cap).ok().map(|v| v.len()),
        }
    }

    /// `max_{S != S'} |S xor S'|`, defined as 1 for a single-super-arm family.
    pub fn width(&self) -> Result<usize> {
        match &self.kind {
            // Closed form: two k-subsets differ in at most 2*min(k, m-k) arms.
            FamilyKind::TopK(k) if *k < self.m => Ok(2 * (*k).min(self.m - *k)),
            FamilyKind::TopK(_) => Ok(1),
            _ => Ok(width_of(&self.enumerate()?)),
        }
    }
}

/// Index of the best set of a canonically ordered list, writing every set's
/// value into `values`. The first near-maximizer is the lexicographically
/// smallest one.
pub(crate) fn explicit_argmax(supers: &[ArmSet], weights: &[f64], values: &mut Vec<f64>) -> usize {
    values.clear();
    let mut best = f64::NEG_INFINITY;
    for s in supers {
        let v = s.value(weights);
        best = best.max(v);
        values.push(v);
    }
    let tol = tie_tol(best);
    values
        .iter()
        .position(|&v| v >= best - tol)
        .expect("nonempty family")
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if libm::fabs(sum) >= libm::fabs(v) {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Width of an enumerated family (1 when there are fewer than two sets).
pub fn width_of(supers: &[ArmSet]) -> usize {
    let mut w = 0;
    for (a, s) in supers.iter().enumerate() {
        for t in &supers[a + 1..] {
            w = w.max(s.symmetric_difference_len(t));
        }
    }
    w.max(1)
}

/// Reusable scratch buffers for [`SuperArmFamily::oracle_into`].
#[derive(Debug, Default, Clone)]
pub struct OracleWorkspace {
    pub(crate) values: Vec<f64>,
    pub(crate) order: Vec<usize>,
    pub(crate) parent: Vec<usize>,
    pub(crate) best: Vec<f64>,
    pub(crate) next_edge: Vec<usize>,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn binomial_exceeds(n: usize, k: usize, cap: usize) -> bool {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap as u128 {
            return true;
        }
    }
    acc > cap as u128
}

fn combinations(n: usize, k: usize) -> Vec<ArmSet> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(ArmSet(idx.clone()));
        // rightmost position that can still move
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return out;
        }
        idx[pos - 1] += 1;
        for j in pos..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
