//! Combinatorial layer: DAGs, vertex sets, vertex cuts, d-separation and the
//! ordered group decomposition.
//!
//! Vertices are dense integers `0..n`. Name mapping lives with datasets, not
//! here.

mod flow;
pub mod brute;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TinError};

/// A duplicate-free, sorted set of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct VertexSet(BTreeSet<usize>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(BTreeSet::new())
    }

    pub fn from_slice(vs: &[usize]) -> Self {
        VertexSet(vs.iter().copied().collect())
    }

    pub fn full(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: usize) -> bool {
        self.0.insert(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.difference(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.0.iter().copied().collect()
    }

    /// Errors unless every member is below `n`.
    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.0.iter().rev().next() {
            Some(&max) if max >= n => Err(TinError::graph(format!(
                "vertex id {max} out of range for graph with {n} vertices"
            ))),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        VertexSet(iter.into_iter().collect())
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// An ordered partition of `0..n` into nonempty disjoint groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupOrdering {
    groups: Vec<VertexSet>,
}

impl GroupOrdering {
    /// Builds an ordering, checking the partition invariants: groups nonempty
    /// and pairwise disjoint.
    pub fn new(groups: Vec<VertexSet>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for g in &groups {
            if g.is_empty() {
                return Err(TinError::input("empty group in ordering"));
            }
            for v in g.iter() {
                if !seen.insert(v) {
                    return Err(TinError::input(format!("vertex {v} appears in two groups")));
                }
            }
        }
        Ok(GroupOrdering { groups })
    }

    pub fn groups(&self) -> &[VertexSet] {
        &self.groups
    }

    /// Union of all groups.
    pub fn universe(&self) -> VertexSet {
        let mut u = VertexSet::new();
        for g in &self.groups {
            u = u.union(g);
        }
        u
    }

    /// Index of the group containing `v`, if any.
    pub fn group_of(&self, v: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(v))
    }

    /// Checks the partition covers exactly `0..n`.
    pub fn check_complete(&self, n: usize) -> Result<()> {
        if self.universe() == VertexSet::full(n) {
            Ok(())
        } else {
            Err(TinError::input(format!(
                "group ordering does not partition 0..{n}"
            )))
        }
    }

    /// Groups variables by equal order value, ascending.
    pub fn from_orders(orders: &[i64]) -> Self {
        let mut distinct: Vec<i64> = orders.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let groups = distinct
            .iter()
            .map(|&o| {
                orders
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x == o)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        GroupOrdering { groups }
    }
}

impl fmt::Display for GroupOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, g) in self.groups.iter().enumerate() {
            if k > 0 {
                write!(f, " -> ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Directed acyclic graph over vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    n: usize,
    children: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Dag {
    /// Builds a DAG from an edge list `(i, j)` meaning `i -> j`.
    ///
    /// Rejects out-of-range ids, self-loops, duplicate edges and cycles.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut children = vec![Vec::new(); n];
        let mut parents = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(TinError::graph(format!(
                    "edge ({i},{j}) out of range for n={n}"
                )));
            }
            if i == j {
                return Err(TinError::graph(format!("self-loop at vertex {i}")));
            }
            if !seen.insert((i, j)) {
                return Err(TinError::graph(format!("duplicate edge ({i},{j})")));
            }
            children[i].push(j);
            parents[j].push(i);
        }
        for l in children.iter_mut().chain(parents.iter_mut()) {
            l.sort_unstable();
        }
        let mut edges: Vec<(usize, usize)> = seen.into_iter().collect();
        edges.sort_unstable();
        let dag = Dag {
            n,
            children,
            parents,
            edges,
        };
        dag.topological_order()
            .ok_or_else(|| TinError::graph("graph contains a directed cycle"))?;
        Ok(dag)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.children[i].binary_search(&j).is_ok()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }

    pub fn is_root(&self, v: usize) -> bool {
        self.parents[v].is_empty()
    }

    /// Kahn topological sort; `None` when a cycle exists.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = (0..self.n).map(|v| self.parents[v].len()).collect();
        let mut queue: Vec<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(v) = queue.pop() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push(c);
                }
            }
        }
        (order.len() == self.n).then_some(order)
    }

    /// Ancestors of `z`, including `z` itself (single-vertex paths count).
    pub fn ancestors(&self, z: &VertexSet) -> Result<VertexSet> {
        z.check_range(self.n)?;
        Ok(self.reach(z, &self.parents, None))
    }

    /// Descendants of `z`, including `z` itself.
    pub fn descendants(&self, z: &VertexSet) -> Result<VertexSet> {
        z.check_range(self.n)?;
        Ok(self.reach(z, &self.children, None))
    }

    /// `Anc_out(S)(Y)`: vertices with a directed path into `y` that avoids `s`
    /// entirely (endpoints included in the avoidance).
    pub fn ancestors_outside(&self, y: &VertexSet, s: &VertexSet) -> Result<VertexSet> {
        y.check_range(self.n)?;
        s.check_range(self.n)?;
        let start: VertexSet = y.iter().filter(|&v| !s.contains(v)).collect();
        Ok(self.reach(&start, &self.parents, Some(s)))
    }

    fn reach(&self, start: &VertexSet, adj: &[Vec<usize>], forbidden: Option<&VertexSet>) -> VertexSet {
        let mut seen = vec![false; self.n];
        let mut stack: Vec<usize> = start.iter().collect();
        for &v in &stack {
            seen[v] = true;
        }
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if seen[u] || forbidden.map_or(false, |f| f.contains(u)) {
                    continue;
                }
                seen[u] = true;
                stack.push(u);
            }
        }
        (0..self.n).filter(|&v| seen[v]).collect()
    }

    /// Whether `s` is a vertex cut from `w` to `y`: no directed path from `w`
    /// to `y` avoids `s` (paths through their own endpoints count as blocked).
    pub fn is_vertex_cut(&self, w: &VertexSet, y: &VertexSet, s: &VertexSet) -> Result<bool> {
        w.check_range(self.n)?;
        Ok(self.ancestors_outside(y, s)?.is_disjoint(w))
    }

    /// Minimum vertex cut from `w` to `y` via unit-capacity vertex splitting.
    ///
    /// The returned cut is the sink-closest one, which is the critical cut in
    /// the sense of the residual-reachability tie-break.
    pub fn min_vertex_cut(&self, w: &VertexSet, y: &VertexSet) -> Result<(usize, VertexSet)> {
        w.check_range(self.n)?;
        y.check_range(self.n)?;
        Ok(flow::min_vertex_cut(self, w, y))
    }

    /// The unique critical vertex cut from `Anc(z)` to `y`: the minimum cut
    /// that also cuts every other minimum cut away from `y`.
    pub fn critical_vertex_cut(&self, z: &VertexSet, y: &VertexSet) -> Result<VertexSet> {
        let anc = self.ancestors(z)?;
        Ok(self.min_vertex_cut(&anc, y)?.1)
    }

    /// Local choke scope `LC(sub)` of a subset of the critical cut from
    /// `Anc(z)` to `y`: the part of `y` still receiving causal effect from
    /// `Anc(z)` when only `critical \ sub` keeps blocking.
    pub fn local_cut_scope(
        &self,
        z: &VertexSet,
        y: &VertexSet,
        sub: &VertexSet,
    ) -> Result<VertexSet> {
        let critical = self.critical_vertex_cut(z, y)?;
        if !sub.is_subset(&critical) {
            return Err(TinError::input(format!(
                "{sub} is not a subset of the critical cut {critical}"
            )));
        }
        let anc_z = self.ancestors(z)?;
        let remaining = critical.difference(sub);
        let sources = self.ancestors_outside_fwd(&anc_z, &remaining);
        Ok(y.iter().filter(|&v| sources.contains(v)).collect())
    }

    /// Vertices receiving a directed path from `w` that avoids `s`.
    fn ancestors_outside_fwd(&self, w: &VertexSet, s: &VertexSet) -> VertexSet {
        let start: VertexSet = w.iter().filter(|&v| !s.contains(v)).collect();
        self.reach(&start, &self.children, Some(s))
    }

    /// Standard d-separation of `z` from `y` given `s` (Bayes-ball style
    /// reachability over the moral semantics of colliders).
    pub fn d_separated(&self, z: &VertexSet, y: &VertexSet, s: &VertexSet) -> Result<bool> {
        z.check_range(self.n)?;
        y.check_range(self.n)?;
        s.check_range(self.n)?;
        if !z.is_disjoint(y) || !z.is_disjoint(s) || !y.is_disjoint(s) {
            return Err(TinError::input("d-separation requires disjoint z, y, s"));
        }
        let in_s: Vec<bool> = (0..self.n).map(|v| s.contains(v)).collect();
        // Vertices with a descendant in s (or in s themselves) open colliders.
        let anc_of_s = self.reach(s, &self.parents, None);

        // State: (vertex, entered-from-child). Standard active-trail search.
        let mut visited = vec![[false; 2]; self.n];
        let mut stack: Vec<(usize, bool)> = z.iter().map(|v| (v, true)).collect();
        while let Some((v, from_child)) = stack.pop() {
            let dir = usize::from(from_child);
            if visited[v][dir] {
                continue;
            }
            visited[v][dir] = true;
            if !in_s[v] && y.contains(v) {
                return Ok(false);
            }
            if from_child {
                if !in_s[v] {
                    for &p in &self.parents[v] {
                        stack.push((p, true));
                    }
                    for &c in &self.children[v] {
                        stack.push((c, false));
                    }
                }
            } else {
                if !in_s[v] {
                    for &c in &self.children[v] {
                        stack.push((c, false));
                    }
                }
                if anc_of_s.contains(v) {
                    for &p in &self.parents[v] {
                        stack.push((p, true));
                    }
                }
            }
        }
        Ok(true)
    }

    /// Ordered group decomposition: repeatedly strip roots together with
    /// their pure leaf children (leaves whose only remaining parent is a
    /// root being removed).
    pub fn group_decomposition(&self) -> GroupOrdering {
        let mut remaining: BTreeSet<usize> = (0..self.n).collect();
        let mut groups = Vec::new();
        while !remaining.is_empty() {
            let roots: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&v| self.parents[v].iter().all(|p| !remaining.contains(p)))
                .collect();
            let mut group: BTreeSet<usize> = roots.iter().copied().collect();
            for &r in &roots {
                for &c in &self.children[r] {
                    if !remaining.contains(&c) || group.contains(&c) {
                        continue;
                    }
                    let live_parents: Vec<usize> = self.parents[c]
                        .iter()
                        .copied()
                        .filter(|p| remaining.contains(p))
                        .collect();
                    let is_leaf = self.children[c].iter().all(|x| !remaining.contains(x));
                    if is_leaf && live_parents == [r] {
                        group.insert(c);
                    }
                }
            }
            for &v in &group {
                remaining.remove(&v);
            }
            groups.push(group.into_iter().collect());
        }
        GroupOrdering { groups }
    }
}

/// Partially directed graph: directed plus undirected edges, no directed
/// cycle among the directed part. Used only to extract grouped orderings
/// from CPDAG-style outputs.
#[derive(Debug, Clone)]
pub struct Pdag {
    n: usize,
    directed: Vec<(usize, usize)>,
    undirected: Vec<(usize, usize)>,
    out: Vec<Vec<usize>>,   // directed i -> j
    und: Vec<Vec<usize>>,   // undirected neighbours
    inc: Vec<Vec<usize>>,   // directed parents
}

impl Pdag {
    pub fn new(n: usize, directed: &[(usize, usize)], undirected: &[(usize, usize)]) -> Result<Self> {
        Dag::new(n, directed)?; // validates range/acyclicity of the directed part
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let mut und = vec![Vec::new(); n];
        for &(i, j) in directed {
            out[i].push(j);
            inc[j].push(i);
        }
        let mut seen = BTreeSet::new();
        for &(i, j) in undirected {
            if i >= n || j >= n {
                return Err(TinError::graph(format!("undirected edge ({i},{j}) out of range")));
            }
            if i == j {
                return Err(TinError::graph(format!("undirected self-loop at {i}")));
            }
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(TinError::graph(format!("duplicate undirected edge ({i},{j})")));
            }
            und[i].push(j);
            und[j].push(i);
        }
        Ok(Pdag {
            n,
            directed: directed.to_vec(),
            undirected: seen.into_iter().collect(),
            out,
            und,
            inc,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> &[(usize, usize)] {
        &self.directed
    }

    pub fn undirected(&self) -> &[(usize, usize)] {
        &self.undirected
    }

    /// Mixed-path ancestors of `v` within `alive`: vertices that reach `v`
    /// using directed edges forward and undirected edges in either direction.
    fn mixed_ancestors(&self, v: usize, alive: &BTreeSet<usize>) -> BTreeSet<usize> {
        // Walk backwards: from v along incoming directed edges and undirected
        // edges, restricted to alive vertices.
        let mut seen = BTreeSet::new();
        let mut stack = vec![v];
        seen.insert(v);
        while let Some(x) = stack.pop() {
            for &p in self.inc[x].iter().chain(self.und[x].iter()) {
                if alive.contains(&p) && seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Grouped ordering extraction: the root-stripping procedure with
    /// mixed-path ancestry standing in for plain ancestry.
    pub fn group_ordering(&self) -> GroupOrdering {
        let mut remaining: BTreeSet<usize> = (0..self.n).collect();
        let mut groups = Vec::new();
        while !remaining.is_empty() {
            let anc: Vec<(usize, BTreeSet<usize>)> = remaining
                .iter()
                .map(|&v| (v, self.mixed_ancestors(v, &remaining)))
                .collect();
            // Roots: nothing strictly earlier (every mixed-ancestor reaches back).
            let roots: Vec<usize> = anc
                .iter()
                .filter(|(v, a)| {
                    a.iter()
                        .all(|&u| u == *v || self.mixed_ancestors(u, &remaining).contains(v))
                })
                .map(|(v, _)| *v)
                .collect();
            let root_set: BTreeSet<usize> = roots.iter().copied().collect();
            let mut group = root_set.clone();
            for &r in &roots {
                for &c in &self.out[r] {
                    if !remaining.contains(&c) || group.contains(&c) {
                        continue;
                    }
                    let live_undirected = self.und[c].iter().any(|u| remaining.contains(u));
                    let live_out = self.out[c].iter().any(|u| remaining.contains(u));
                    let live_parents: Vec<usize> = self.inc[c]
                        .iter()
                        .copied()
                        .filter(|p| remaining.contains(p))
                        .collect();
                    if !live_undirected && !live_out && live_parents == [r] {
                        group.insert(c);
                    }
                }
            }
            if group.is_empty() {
                // Cannot happen for a valid pdag, but never loop forever.
                group = remaining.clone();
            }
            for &v in &group {
                remaining.remove(&v);
            }
            groups.push(group.into_iter().collect());
        }
        GroupOrdering { groups }
    }
}
