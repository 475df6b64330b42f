//! Graph-structured families: spanning trees and DAG source-sink paths.
//!
//! Base arm `i` is edge `i` in both cases.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{tie_tol, ArmSet, OracleWorkspace};
use crate::{Error, Result};

/// Undirected multigraph given as an edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidFamily("graph has no edges".into()));
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= nodes || v >= nodes) {
            return Err(Error::InvalidFamily(format!(
                "edge ({u},{v}) references a node outside 0..{nodes}"
            )));
        }
        Ok(Self { nodes, edges })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub(super) fn validate_connected(&self) -> Result<()> {
        let mut parent: Vec<usize> = (0..self.nodes).collect();
        let mut components = self.nodes;
        for &(u, v) in &self.edges {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        if components != 1 {
            return Err(Error::InvalidFamily(format!(
                "spanning-tree family needs a connected graph ({components} components)"
            )));
        }
        Ok(())
    }

    /// Kruskal on edges sorted by descending weight, ascending index on ties.
    ///
    /// Spanning trees all have `nodes - 1` edges, and for equal-size bases of a
    /// matroid this order returns the lexicographically smallest maximizer.
    pub(super) fn max_spanning_tree(
        &self,
        weights: &[f64],
        ws: &mut OracleWorkspace,
        out: &mut ArmSet,
    ) {
        let order = &mut ws.order;
        order.clear();
        order.extend(0..self.edges.len());
        order.sort_unstable_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
        let parent = &mut ws.parent;
        parent.clear();
        parent.extend(0..self.nodes);
        let need = self.nodes - 1;
        for &e in order.iter() {
            if out.len() == need {
                break;
            }
            let (u, v) = self.edges[e];
            let (a, b) = (find(parent, u), find(parent, v));
            if a != b {
                parent[a] = b;
                out.push_unchecked(e);
            }
        }
        out.normalize();
    }

    pub(super) fn enumerate_trees(&self, cap: usize) -> Result<Vec<ArmSet>> {
        let need = self.nodes - 1;
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(need);
        self.grow_trees(0, need, &mut chosen, &mut out, cap)?;
        Ok(out)
    }

    fn grow_trees(
        &self,
        next: usize,
        need: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<ArmSet>,
        cap: usize,
    ) -> Result<()> {
        if chosen.len() == need {
            if out.len() == cap {
                return Err(Error::TooLarge { cap });
            }
            out.push(chosen.iter().copied().collect());
            return Ok(());
        }
        if self.edges.len() - next < need - chosen.len() {
            return Ok(());
        }
        chosen.push(next);
        if self.is_forest(chosen) {
            self.grow_trees(next + 1, need, chosen, out, cap)?;
        }
        chosen.pop();
        self.grow_trees(next + 1, need, chosen, out, cap)
    }

    fn is_forest(&self, chosen: &[usize]) -> bool {
        let mut parent: Vec<usize> = (0..self.nodes).collect();
        for &e in chosen {
            let (u, v) = self.edges[e];
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Directed acyclic graph with a distinguished source and sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    nodes: usize,
    edges: Vec<(usize, usize)>,
    source: usize,
    sink: usize,
    out: Vec<Vec<usize>>,
    topo: Vec<usize>,
    topo_pos: Vec<usize>,
}

impl Dag {
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>, source: usize, sink: usize) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidFamily("DAG has no edges".into()));
        }
        if source >= nodes || sink >= nodes {
            return Err(Error::InvalidFamily("source/sink outside the node range".into()));
        }
        if source == sink {
            return Err(Error::InvalidFamily("source and sink must differ".into()));
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= nodes || v >= nodes) {
            return Err(Error::InvalidFamily(format!(
                "edge ({u},{v}) references a node outside 0..{nodes}"
            )));
        }
        let mut out = vec![Vec::new(); nodes];
        let mut indeg = vec![0usize; nodes];
        for (e, &(u, v)) in edges.iter().enumerate() {
            out[u].push(e);
            indeg[v] += 1;
        }
        let mut queue: VecDeque<usize> = (0..nodes).filter(|&v| indeg[v] == 0).collect();
        let mut topo = Vec::with_capacity(nodes);
        while let Some(u) = queue.pop_front() {
            topo.push(u);
            for &e in &out[u] {
                let v = edges[e].1;
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push_back(v);
                }
            }
        }
        if topo.len() != nodes {
            return Err(Error::InvalidFamily("edge list contains a cycle".into()));
        }
        let mut topo_pos = vec![0; nodes];
        for (p, &v) in topo.iter().enumerate() {
            topo_pos[v] = p;
        }
        let dag = Self {
            nodes,
            edges,
            source,
            sink,
            out,
            topo,
            topo_pos,
        };
        if !dag.reaches(source, sink, |_| true) {
            return Err(Error::InvalidFamily("sink is not reachable from source".into()));
        }
        Ok(dag)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Longest source-to-sink path by dynamic programming in reverse
    /// topological order. Handles negative weights.
    pub(super) fn longest_path(&self, weights: &[f64], ws: &mut OracleWorkspace, out: &mut ArmSet) {
        let best = &mut ws.best;
        best.clear();
        best.resize(self.nodes, f64::NEG_INFINITY);
        let next = &mut ws.next_edge;
        next.clear();
        next.resize(self.nodes, usize::MAX);
        best[self.sink] = 0.0;
        for &u in self.topo.iter().rev() {
            if u == self.sink {
                continue;
            }
            for &e in &self.out[u] {
                let v = self.edges[e].1;
                if best[v] == f64::NEG_INFINITY {
                    continue;
                }
                let cand = weights[e] + best[v];
                if cand > best[u] {
                    best[u] = cand;
                    next[u] = e;
                }
            }
        }

        // Follow the argmax pointers; if any node on the way has a second
        // near-tight edge, fall back to the exact lexicographic tie-break.
        let mut u = self.source;
        let mut tied = false;
        while u != self.sink {
            let tol = tie_tol(best[u]);
            let tight = self.out[u]
                .iter()
                .filter(|&&e| {
                    let v = self.edges[e].1;
                    best[v] > f64::NEG_INFINITY && weights[e] + best[v] >= best[u] - tol
                })
                .count();
            if tight > 1 {
                tied = true;
                break;
            }
            let e = next[u];
            out.push_unchecked(e);
            u = self.edges[e].1;
        }
        if tied {
            out.clear();
            let best = best.clone();
            for e in self.lexmin_tight_path(weights, &best) {
                out.push_unchecked(e);
            }
        }
        out.normalize();
    }

    fn is_tight(&self, weights: &[f64], best: &[f64], e: usize) -> bool {
        let (u, v) = self.edges[e];
        best[u] > f64::NEG_INFINITY
            && best[v] > f64::NEG_INFINITY
            && weights[e] + best[v] >= best[u] - tie_tol(best[u])
    }

    /// Lexicographically smallest edge set among near-optimal paths.
    ///
    /// Grows the sorted prefix greedily: stop as soon as some tight path uses
    /// exactly the prefix, otherwise append the smallest edge that still
    /// admits a completion using only larger edges.
    fn lexmin_tight_path(&self, weights: &[f64], best: &[f64]) -> Vec<usize> {
        let tight: Vec<bool> = (0..self.edges.len())
            .map(|e| self.is_tight(weights, best, e))
            .collect();
        let mut prefix: Vec<usize> = Vec::new();
        loop {
            if !prefix.is_empty() && self.path_through(&prefix, |_| false) {
                return prefix;
            }
            let lo = prefix.last().map_or(0, |&e| e + 1);
            let mut extended = false;
            for e in lo..self.edges.len() {
                if !tight[e] {
                    continue;
                }
                prefix.push(e);
                if self.path_through(&prefix, |f| f > e && tight[f]) {
                    extended = true;
                    break;
                }
                prefix.pop();
            }
            debug_assert!(extended, "a tight path always exists");
            if !extended {
                return prefix;
            }
        }
    }

    /// Is there a source-sink path that uses every edge in `required` and
    /// otherwise only edges accepted by `allowed`?
    fn path_through(&self, required: &[usize], allowed: impl Fn(usize) -> bool) -> bool {
        let mut req: Vec<usize> = required.to_vec();
        req.sort_by_key(|&e| self.topo_pos[self.edges[e].0]);
        let mut cur = self.source;
        for &e in &req {
            let (u, v) = self.edges[e];
            if !self.reaches(cur, u, &allowed) {
                return false;
            }
            cur = v;
        }
        self.reaches(cur, self.sink, &allowed)
    }

    fn reaches(&self, from: usize, to: usize, allowed: impl Fn(usize) -> bool) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.nodes];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for &e in &self.out[u] {
                if !allowed(e) {
                    continue;
                }
                let v = self.edges[e].1;
                if v == to {
                    return true;
                }
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }

    pub(super) fn enumerate_paths(&self, cap: usize) -> Result<Vec<ArmSet>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.walk(self.source, &mut path, &mut out, cap)?;
        Ok(out)
    }

    fn walk(&self, u: usize, path: &mut Vec<usize>, out: &mut Vec<ArmSet>, cap: usize) -> Result<()> {
        if u == self.sink {
            if out.len() == cap {
                return Err(Error::TooLarge { cap });
            }
            out.push(path.iter().copied().collect());
            return Ok(());
        }
        for &e in &self.out[u] {
            path.push(e);
            self.walk(self.edges[e].1, path, out, cap)?;
            path.pop();
        }
        Ok(())
    }
}
