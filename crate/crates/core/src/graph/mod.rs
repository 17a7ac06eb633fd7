//! Causal DAG, d-separation and back-door adjustment sets.

mod edgelist;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

pub use edgelist::{parse_edge_list, write_edge_list};

/// Upper bound on adjustment candidates enumerated by [`CausalGraph::backdoor_sets`].
pub const MAX_ADJUSTMENT_CANDIDATES: usize = 22;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph has a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("node sets must be disjoint ({0:?} appears twice)")]
    NotDisjoint(String),
    #[error("treatment and outcome must differ")]
    SameNode,
    #[error("{0} adjustment candidates exceed the enumeration limit of {MAX_ADJUSTMENT_CANDIDATES}")]
    TooManyCandidates(usize),
    #[error("edge list line {line}: {message}")]
    Syntax { line: usize, message: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CausalGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl CausalGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S)]) -> Self {
        let mut g = Self::new();
        for (a, b) in edges {
            g.add_edge(a.as_ref(), b.as_ref());
        }
        g
    }

    /// Confounders C1..C5 point into every treatment T1..T3 and outcome Y1..Y4,
    /// and every treatment points into every outcome.
    pub fn default_graph() -> Self {
        let cs = ["C1", "C2", "C3", "C4", "C5"];
        let ts = ["T1", "T2", "T3"];
        let ys = ["Y1", "Y2", "Y3", "Y4"];
        let mut g = Self::new();
        for n in cs.iter().chain(&ts).chain(&ys) {
            g.add_node(n);
        }
        for c in cs {
            for t in ts {
                g.add_edge(c, t);
            }
            for y in ys {
                g.add_edge(c, y);
            }
        }
        for t in ts {
            for y in ys {
                g.add_edge(t, y);
            }
        }
        g
    }

    pub fn add_node(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), i);
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        i
    }

    /// Adds `from -> to`, creating nodes as needed. Duplicate edges are ignored.
    pub fn add_edge(&mut self, from: &str, to: &str) {
        let (a, b) = (self.add_node(from), self.add_node(to));
        if !self.children[a].contains(&b) {
            self.children[a].push(b);
            self.parents[b].push(a);
        }
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edges(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        for (a, kids) in self.children.iter().enumerate() {
            for &b in kids {
                out.push((self.names[a].as_str(), self.names[b].as_str()));
            }
        }
        out
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn id(&self, name: &str) -> Result<usize, GraphError> {
        self.index.get(name).copied().ok_or_else(|| GraphError::UnknownNode(name.to_owned()))
    }

    pub fn parents_of(&self, name: &str) -> Result<Vec<&str>, GraphError> {
        let i = self.id(name)?;
        Ok(self.parents[i].iter().map(|&p| self.names[p].as_str()).collect())
    }

    /// Ok iff there is no directed cycle; otherwise reports one cycle.
    pub fn validate_dag(&self) -> Result<(), GraphError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let n = self.node_count();
        let mut mark = vec![Mark::New; n];
        let mut stack_path: Vec<usize> = Vec::new();

        for root in 0..n {
            if mark[root] != Mark::New {
                continue;
            }
            // Iterative DFS with explicit child cursors.
            let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
            mark[root] = Mark::Active;
            stack_path.push(root);
            while let Some(&mut (v, ref mut cursor)) = frames.last_mut() {
                if let Some(&c) = self.children[v].get(*cursor) {
                    *cursor += 1;
                    match mark[c] {
                        Mark::New => {
                            mark[c] = Mark::Active;
                            stack_path.push(c);
                            frames.push((c, 0));
                        }
                        Mark::Active => {
                            let start = stack_path.iter().position(|&x| x == c).unwrap_or(0);
                            let mut cycle: Vec<String> =
                                stack_path[start..].iter().map(|&i| self.names[i].clone()).collect();
                            cycle.push(self.names[c].clone());
                            return Err(GraphError::Cycle(cycle));
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[v] = Mark::Done;
                    stack_path.pop();
                    frames.pop();
                }
            }
        }
        Ok(())
    }

    fn resolve(&self, names: &[&str]) -> Result<Vec<usize>, GraphError> {
        names.iter().map(|n| self.id(n)).collect()
    }

    fn closure(&self, seeds: &[usize], next: &[Vec<usize>]) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut stack: Vec<usize> = seeds.to_vec();
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                stack.extend(&next[v]);
            }
        }
        seen
    }

    /// Nodes with a directed path into any seed, seeds included.
    fn ancestors_mask(&self, seeds: &[usize]) -> Vec<bool> {
        self.closure(seeds, &self.parents)
    }

    /// Nodes reachable by a directed path from any seed, seeds included.
    fn descendants_mask(&self, seeds: &[usize]) -> Vec<bool> {
        self.closure(seeds, &self.children)
    }

    /// Are `x` and `y` d-separated given `z`?
    pub fn d_separated(&self, x: &[&str], y: &[&str], z: &[&str]) -> Result<bool, GraphError> {
        let (xi, yi, zi) = (self.resolve(x)?, self.resolve(y)?, self.resolve(z)?);
        let mut seen = BTreeSet::new();
        for (&i, name) in xi.iter().chain(&yi).chain(&zi).zip(x.iter().chain(y).chain(z)) {
            if !seen.insert(i) {
                return Err(GraphError::NotDisjoint((*name).to_owned()));
            }
        }
        Ok(self.d_separated_ids(&xi, &yi, &zi, None))
    }

    /// Bayes-ball reachability. `cut_outgoing` drops that node's outgoing edges.
    fn d_separated_ids(&self, x: &[usize], y: &[usize], z: &[usize], cut_outgoing: Option<usize>) -> bool {
        let n = self.node_count();
        let mut in_z = vec![false; n];
        for &v in z {
            in_z[v] = true;
        }
        let has_active_descendant = self.ancestors_mask(z);
        let mut targets = vec![false; n];
        for &v in y {
            targets[v] = true;
        }
        let kids = |v: usize| -> &[usize] {
            if Some(v) == cut_outgoing {
                &[]
            } else {
                &self.children[v]
            }
        };
        let parents = |v: usize| -> Vec<usize> {
            self.parents[v].iter().copied().filter(|&p| Some(p) != cut_outgoing).collect()
        };

        // (node, arrived_from_child)
        let mut visited = vec![[false; 2]; n];
        let mut stack: Vec<(usize, bool)> = x.iter().map(|&v| (v, true)).collect();
        while let Some((v, up)) = stack.pop() {
            if visited[v][up as usize] {
                continue;
            }
            visited[v][up as usize] = true;
            if targets[v] && !in_z[v] {
                return false;
            }
            if up {
                if !in_z[v] {
                    stack.extend(parents(v).into_iter().map(|p| (p, true)));
                    stack.extend(kids(v).iter().map(|&c| (c, false)));
                }
            } else {
                if !in_z[v] {
                    stack.extend(kids(v).iter().map(|&c| (c, false)));
                }
                if has_active_descendant[v] {
                    stack.extend(parents(v).into_iter().map(|p| (p, true)));
                }
            }
        }
        true
    }

    fn backdoor_valid_ids(&self, t: usize, y: usize, z: &[usize], desc_t: &[bool]) -> bool {
        z.iter().all(|&v| !desc_t[v]) && self.d_separated_ids(&[t], &[y], z, Some(t))
    }

    /// Does `z` satisfy the back-door criterion for `treatment -> outcome`?
    pub fn is_backdoor_set(&self, treatment: &str, outcome: &str, z: &[&str]) -> Result<bool, GraphError> {
        let (t, y) = (self.id(treatment)?, self.id(outcome)?);
        if t == y {
            return Err(GraphError::SameNode);
        }
        let zi = self.resolve(z)?;
        if zi.contains(&t) || zi.contains(&y) {
            return Ok(false);
        }
        let desc_t = self.descendants_mask(&[t]);
        Ok(self.backdoor_valid_ids(t, y, &zi, &desc_t))
    }

    /// Minimal back-door adjustment sets, plus the parent set of the treatment
    /// when it is valid. Sorted by size, then lexicographically by node name.
    pub fn backdoor_sets(&self, treatment: &str, outcome: &str) -> Result<Vec<Vec<String>>, GraphError> {
        let (t, y) = (self.id(treatment)?, self.id(outcome)?);
        if t == y {
            return Err(GraphError::SameNode);
        }
        let desc_t = self.descendants_mask(&[t]);
        let anc = self.ancestors_mask(&[t, y]);
        let candidates: Vec<usize> =
            (0..self.node_count()).filter(|&v| anc[v] && !desc_t[v] && v != y).collect();
        if candidates.len() > MAX_ADJUSTMENT_CANDIDATES {
            return Err(GraphError::TooManyCandidates(candidates.len()));
        }

        let m = candidates.len();
        let mut masks: Vec<u32> = (0..(1u32 << m)).collect();
        masks.sort_by_key(|s| (s.count_ones(), *s));
        let mut found: Vec<u32> = Vec::new();
        for s in masks {
            if found.iter().any(|&f| s & f == f) {
                continue;
            }
            let z: Vec<usize> = (0..m).filter(|b| s >> b & 1 == 1).map(|b| candidates[b]).collect();
            if self.backdoor_valid_ids(t, y, &z, &desc_t) {
                found.push(s);
            }
        }

        let to_names = |ids: &[usize]| -> Vec<String> {
            let mut v: Vec<String> = ids.iter().map(|&i| self.names[i].clone()).collect();
            v.sort();
            v
        };
        let mut sets: Vec<Vec<String>> = found
            .iter()
            .map(|&s| {
                let ids: Vec<usize> = (0..m).filter(|b| s >> b & 1 == 1).map(|b| candidates[b]).collect();
                to_names(&ids)
            })
            .collect();

        let pa: Vec<usize> = self.parents[t].iter().copied().filter(|&p| p != y).collect();
        if self.backdoor_valid_ids(t, y, &pa, &desc_t) {
            let pa = to_names(&pa);
            if !sets.contains(&pa) {
                sets.push(pa);
            }
        }
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(sets)
    }
}
