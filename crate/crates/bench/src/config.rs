//! Experiment configuration (strict JSON) and the built-in two-super-arm problem.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tsexplore_core::structures::{Dag, Graph};
use tsexplore_core::{BanditInstance, Distribution, SuperArmFamily};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Tsexplore,
    Clucb,
    Roundrobin,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Tsexplore => "tsexplore",
            Algo::Clucb => "clucb",
            Algo::Roundrobin => "roundrobin",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algo {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsexplore" => Ok(Algo::Tsexplore),
            "clucb" => Ok(Algo::Clucb),
            "roundrobin" => Ok(Algo::Roundrobin),
            _ => Err(BenchError::Config(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub arms: Vec<Distribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Topk {
        m: usize,
        k: usize,
    },
    Explicit {
        m: usize,
        supers: Vec<Vec<usize>>,
    },
    SpanningTree {
        nodes: usize,
        edges: Vec<(usize, usize)>,
    },
    DagPath {
        nodes: usize,
        edges: Vec<(usize, usize)>,
        source: usize,
        sink: usize,
    },
}

impl FamilySpec {
    pub fn build(&self) -> Result<SuperArmFamily, BenchError> {
        Ok(match self {
            FamilySpec::Topk { m, k } => SuperArmFamily::top_k(*m, *k)?,
            FamilySpec::Explicit { m, supers } => SuperArmFamily::explicit(*m, supers.iter().cloned())?,
            FamilySpec::SpanningTree { nodes, edges } => {
                SuperArmFamily::spanning_tree(Graph::new(*nodes, edges.clone())?)?
            }
            FamilySpec::DagPath {
                nodes,
                edges,
                source,
                sink,
            } => SuperArmFamily::dag_path(Dag::new(*nodes, edges.clone(), *source, *sink)?)?,
        })
    }
}

/// `"equal-delta"` or a fixed number.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "QRuleRepr", into = "QRuleRepr")]
pub enum QRule {
    #[default]
    EqualDelta,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum QRuleRepr {
    Name(String),
    Value(f64),
}

impl TryFrom<QRuleRepr> for QRule {
    type Error = String;

    fn try_from(r: QRuleRepr) -> Result<Self, String> {
        match r {
            QRuleRepr::Name(s) if s == "equal-delta" => Ok(QRule::EqualDelta),
            QRuleRepr::Name(s) => Err(format!("q_rule must be \"equal-delta\" or a number, got {s:?}")),
            QRuleRepr::Value(v) => Ok(QRule::Fixed(v)),
        }
    }
}

impl From<QRule> for QRuleRepr {
    fn from(q: QRule) -> Self {
        match q {
            QRule::EqualDelta => QRuleRepr::Name("equal-delta".into()),
            QRule::Fixed(v) => QRuleRepr::Value(v),
        }
    }
}

impl QRule {
    pub fn q_for(self, delta: f64) -> f64 {
        match self {
            QRule::EqualDelta => delta,
            QRule::Fixed(q) => q,
        }
    }
}

fn default_parallelism() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Explicit instance; requires `family`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    /// Sizes of the built-in two-super-arm problem.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_grid: Vec<usize>,
    pub algorithms: Vec<Algo>,
    pub delta_grid: Vec<f64>,
    #[serde(default)]
    pub q_rule: QRule,
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub monitor: bool,
    /// Record wall-clock time per run; off keeps output byte-reproducible.
    #[serde(default)]
    pub timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_pulls: Option<u64>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("algorithms must be nonempty".into());
        }
        if self.delta_grid.is_empty() {
            return bad("delta_grid must be nonempty".into());
        }
        if let Some(d) = self.delta_grid.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
            return bad(format!("delta must be in (0, 1), got {d}"));
        }
        if let QRule::Fixed(q) = self.q_rule {
            if !(q > 0.0 && q <= 0.1) {
                return bad(format!("q must be in (0, 0.1], got {q}"));
            }
        }
        if self.n_grid.contains(&0) {
            return bad("n_grid entries must be positive".into());
        }
        match (&self.instance, &self.family) {
            (Some(_), None) | (None, Some(_)) => {
                return bad("instance and family must be given together".into())
            }
            (None, None) if self.n_grid.is_empty() => {
                return bad("either n_grid or instance and family is required".into())
            }
            _ => {}
        }
        if self.monitor {
            let lowest = self.delta_grid.iter().copied().fold(f64::INFINITY, f64::min);
            if lowest < 0.1 {
                return bad(format!("monitor mode needs delta >= 0.1, got {lowest}"));
            }
        }
        Ok(())
    }
}

/// `2n` Bernoulli arms, the first `n` with mean 0.1 and the rest 0.9;
/// two super arms `{0..n}` and `{n..2n}`.
pub fn make_problem(n: usize) -> Result<(BanditInstance, SuperArmFamily), BenchError> {
    if n == 0 {
        return Err(BenchError::Config("n must be positive".into()));
    }
    let means: Vec<f64> = (0..2 * n).map(|i| if i < n { 0.1 } else { 0.9 }).collect();
    let instance = BanditInstance::bernoulli(&means)?;
    let family = SuperArmFamily::explicit(2 * n, [(0..n).collect::<Vec<_>>(), (n..2 * n).collect()])?;
    Ok((instance, family))
}

pub fn problem_id(n: usize) -> String {
    format!("problem-{n}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use tsexplore_core::ArmSet;

    #[test]
    fn problem_shapes() {
        let (inst, fam) = make_problem(1).unwrap();
        assert_eq!(inst.true_means(), &[0.1, 0.9]);
        assert_eq!(fam.enumerate().unwrap(), vec![ArmSet::from([0]), ArmSet::from([1])]);
        let (inst, fam) = make_problem(2).unwrap();
        assert_eq!(inst.true_means().len(), 4);
        assert_eq!(fam.enumerate().unwrap(), vec![ArmSet::from([0, 1]), ArmSet::from([2, 3])]);
        assert!(make_problem(0).is_err());
    }

    #[test]
    fn parse_minimal_and_full() {
        let s = ExperimentSpec::from_json(
            r#"{"n_grid":[2],"algorithms":["tsexplore","clucb"],"delta_grid":[0.1],"trials":3}"#,
        )
        .unwrap();
        assert_eq!(s.q_rule, QRule::EqualDelta);
        assert_eq!(s.parallelism, 1);
        let s = ExperimentSpec::from_json(
            r#"{"instance":{"name":"k2","arms":[{"kind":"bernoulli","p":0.2},{"kind":"bernoulli","p":0.5},{"kind":"bernoulli","p":0.7}]},
                "family":{"variant":"topk","m":3,"k":2},
                "algorithms":["roundrobin"],"delta_grid":[0.05],"q_rule":0.05,"trials":1,
                "base_seed":9,"parallelism":2,"monitor":false,"timing":true,"max_pulls":1000}"#,
        )
        .unwrap();
        assert_eq!(s.q_rule, QRule::Fixed(0.05));
        assert_eq!(s.family.unwrap().build().unwrap().num_arms(), 3);
    }

    #[test]
    fn family_variants_parse() {
        for f in [
            r#"{"variant":"explicit","m":4,"supers":[[0,1],[2,3]]}"#,
            r#"{"variant":"spanning_tree","nodes":3,"edges":[[0,1],[1,2],[0,2]]}"#,
            r#"{"variant":"dag_path","nodes":3,"edges":[[0,1],[1,2],[0,2]],"source":0,"sink":2}"#,
        ] {
            let spec: FamilySpec = serde_json::from_str(f).unwrap();
            spec.build().unwrap();
        }
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            r#"{"n_grid":[2],"algorithms":["tsexplore"],"delta_grid":[0.1],"trials":3,"extra":1}"#,
            r#"{"n_grid":[2],"algorithms":["tsexplore"],"delta_grid":[0.1],"trials":0}"#,
            r#"{"n_grid":[2],"algorithms":[],"delta_grid":[0.1],"trials":1}"#,
            r#"{"n_grid":[2],"algorithms":["tsexplore"],"delta_grid":[],"trials":1}"#,
            r#"{"n_grid":[2],"algorithms":["naive"],"delta_grid":[0.1],"trials":1}"#,
            r#"{"n_grid":[2],"algorithms":["tsexplore"],"delta_grid":[0.1],"q_rule":"half","trials":1}"#,
            r#"{"algorithms":["tsexplore"],"delta_grid":[0.1],"trials":1}"#,
            r#"{"n_grid":[2],"algorithms":["tsexplore"],"delta_grid":[0.01],"trials":1,"monitor":true}"#,
            r#"{"n_grid":[2],"family":{"variant":"topk","m":3,"k":1,"z":0},"algorithms":["tsexplore"],"delta_grid":[0.1],"trials":1}"#,
        ] {
            assert!(ExperimentSpec::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn round_trip_json() {
        let s = ExperimentSpec::from_json(
            r#"{"n_grid":[1,2],"algorithms":["clucb"],"delta_grid":[0.1,0.01],"q_rule":0.1,"trials":2}"#,
        )
        .unwrap();
        let back = ExperimentSpec::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
    }
}
