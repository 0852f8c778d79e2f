//! Reference implementations by direct enumeration.
//!
//! These exist to cross-check the production paths on small graphs: vertex
//! cuts by path enumeration, minimum cuts by subset sweep, critical cuts by
//! definition, d-separation by moralization, and exhaustive DAG generation.
//! Everything here is exponential and intended for n <= 8.

use std::collections::BTreeSet;

use super::{Dag, VertexSet};

/// All simple directed paths from any vertex of `w` to any vertex of `y`.
/// Single-vertex paths are included when a vertex lies in both sets.
pub fn all_paths(dag: &Dag, w: &VertexSet, y: &VertexSet) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    fn dfs(
        dag: &Dag,
        v: usize,
        y: &VertexSet,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        path.push(v);
        if y.contains(v) {
            out.push(path.clone());
        }
        for &c in dag.children(v) {
            if !path.contains(&c) {
                dfs(dag, c, y, path, out);
            }
        }
        path.pop();
    }
    for v in w.iter() {
        dfs(dag, v, y, &mut path, &mut out);
    }
    out
}

/// Vertex-cut verdict by enumerating every simple path.
pub fn is_vertex_cut_paths(dag: &Dag, w: &VertexSet, y: &VertexSet, s: &VertexSet) -> bool {
    all_paths(dag, w, y)
        .iter()
        .all(|p| p.iter().any(|v| s.contains(*v)))
}

/// Ancestors via the reachability (transitive-closure) matrix.
pub fn ancestors_closure(dag: &Dag, z: &VertexSet) -> VertexSet {
    let n = dag.n();
    let mut reach = vec![vec![false; n]; n];
    for v in 0..n {
        reach[v][v] = true;
    }
    // Repeated relaxation; n passes suffice on a DAG.
    for _ in 0..n {
        for &(i, j) in dag.edges() {
            for t in 0..n {
                if reach[j][t] {
                    reach[i][t] = true;
                }
            }
        }
    }
    (0..n)
        .filter(|&u| z.iter().any(|t| reach[u][t]))
        .collect()
}

fn subsets_of_size(pool: &[usize], k: usize) -> Vec<VertexSet> {
    let mut out = Vec::new();
    let mut pick = Vec::new();
    fn rec(pool: &[usize], start: usize, k: usize, pick: &mut Vec<usize>, out: &mut Vec<VertexSet>) {
        if pick.len() == k {
            out.push(VertexSet::from_slice(pick));
            return;
        }
        for i in start..pool.len() {
            pick.push(pool[i]);
            rec(pool, i + 1, k, pick, out);
            pick.pop();
        }
    }
    rec(pool, 0, k, &mut pick, &mut out);
    out
}

/// All subsets of `0..n` of each size, smallest first.
pub fn all_subsets(n: usize) -> Vec<VertexSet> {
    let pool: Vec<usize> = (0..n).collect();
    (0..=n).flat_map(|k| subsets_of_size(&pool, k)).collect()
}

/// Minimum vertex cut size by sweeping subsets in increasing size.
pub fn min_vertex_cut_exhaustive(dag: &Dag, w: &VertexSet, y: &VertexSet) -> usize {
    let pool: Vec<usize> = (0..dag.n()).collect();
    for k in 0..=dag.n() {
        for s in subsets_of_size(&pool, k) {
            if is_vertex_cut_paths(dag, w, y, &s) {
                return k;
            }
        }
    }
    unreachable!("the full vertex set is always a cut");
}

/// Every minimum vertex cut from `w` to `y`.
pub fn all_minimum_cuts(dag: &Dag, w: &VertexSet, y: &VertexSet) -> Vec<VertexSet> {
    let size = min_vertex_cut_exhaustive(dag, w, y);
    let pool: Vec<usize> = (0..dag.n()).collect();
    subsets_of_size(&pool, size)
        .into_iter()
        .filter(|s| is_vertex_cut_paths(dag, w, y, s))
        .collect()
}

/// Critical cuts from `Anc(z)` to `y` by definition: minimum cuts `s` such
/// that no vertex of any minimum cut retains causal effect on `y` outside
/// `s`.
pub fn critical_cuts_by_definition(dag: &Dag, z: &VertexSet, y: &VertexSet) -> Vec<VertexSet> {
    let anc = dag.ancestors(z).unwrap();
    let cuts = all_minimum_cuts(dag, &anc, y);
    let union: VertexSet = cuts.iter().fold(VertexSet::new(), |a, c| a.union(c));
    cuts.iter()
        .filter(|s| dag.ancestors_outside(y, s).unwrap().is_disjoint(&union))
        .cloned()
        .collect()
}

/// Local choke scope by definition: members of `y` that keep a path from
/// `Anc(z)` when only `critical \ sub` blocks.
pub fn local_cut_scope_paths(
    dag: &Dag,
    z: &VertexSet,
    y: &VertexSet,
    critical: &VertexSet,
    sub: &VertexSet,
) -> VertexSet {
    let anc = dag.ancestors(z).unwrap();
    let rest = critical.difference(sub);
    y.iter()
        .filter(|&yi| {
            all_paths(dag, &anc, &VertexSet::from_slice(&[yi]))
                .iter()
                .any(|p| p.iter().all(|v| !rest.contains(*v)))
        })
        .collect()
}

/// d-separation by ancestral-subgraph moralization.
pub fn d_separated_moral(dag: &Dag, z: &VertexSet, y: &VertexSet, s: &VertexSet) -> bool {
    let relevant = dag
        .ancestors(&z.union(y).union(s))
        .expect("sets validated by caller");
    let n = dag.n();
    let mut adj = vec![vec![false; n]; n];
    for &(i, j) in dag.edges() {
        if relevant.contains(i) && relevant.contains(j) {
            adj[i][j] = true;
            adj[j][i] = true;
        }
    }
    // Marry co-parents.
    for v in relevant.iter() {
        let ps: Vec<usize> = dag
            .parents(v)
            .iter()
            .copied()
            .filter(|p| relevant.contains(*p))
            .collect();
        for (a_idx, &a) in ps.iter().enumerate() {
            for &b in &ps[a_idx + 1..] {
                adj[a][b] = true;
                adj[b][a] = true;
            }
        }
    }
    // Undirected reachability from z avoiding s.
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = z.iter().filter(|v| relevant.contains(*v)).collect();
    for &v in &stack {
        seen[v] = true;
    }
    while let Some(v) = stack.pop() {
        if s.contains(v) {
            continue;
        }
        for u in 0..n {
            if adj[v][u] && !seen[u] && relevant.contains(u) {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    !y.iter().any(|v| seen[v] && !s.contains(v))
}

/// Maximum number of vertex-disjoint directed paths from `w` to `y`, by
/// exhaustive search (Menger's dual of the minimum vertex cut).
pub fn max_disjoint_paths(dag: &Dag, w: &VertexSet, y: &VertexSet) -> usize {
    let paths = all_paths(dag, w, y);
    fn rec(paths: &[Vec<usize>], used: &mut BTreeSet<usize>, from: usize) -> usize {
        let mut best = 0;
        for i in from..paths.len() {
            if paths[i].iter().any(|v| used.contains(v)) {
                continue;
            }
            for &v in &paths[i] {
                used.insert(v);
            }
            best = best.max(1 + rec(paths, used, i + 1));
            for &v in &paths[i] {
                used.remove(&v);
            }
        }
        best
    }
    rec(&paths, &mut BTreeSet::new(), 0)
}

/// Every labeled DAG on `n` vertices, produced by enumerating topological
/// permutations over upper-triangular edge masks and deduplicating.
pub fn all_dags(n: usize) -> Vec<Dag> {
    assert!(n <= 5, "exhaustive DAG enumeration is limited to n <= 5");
    let mut perms = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, &mut perms);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let mut seen: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    let mut out = Vec::new();
    for perm in &perms {
        for mask in 0u32..(1 << pairs.len()) {
            let mut edges: Vec<(usize, usize)> = Vec::new();
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    edges.push((perm[i], perm[j]));
                }
            }
            edges.sort_unstable();
            if seen.insert(edges.clone()) {
                out.push(Dag::new(n, &edges).expect("enumerated DAGs are valid"));
            }
        }
    }
    out
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

/// A seeded random DAG: random permutation, then each forward pair kept with
/// probability `p`.
pub fn random_dag(n: usize, p: f64, rng: &mut impl rand::Rng) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                edges.push((order[i], order[j]));
            }
        }
    }
    Dag::new(n, &edges).expect("construction is acyclic")
}
