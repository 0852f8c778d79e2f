//! Unit-capacity vertex-split max-flow for minimum vertex cuts.
//!
//! Every vertex v becomes v_in -> v_out with capacity one; graph edges and
//! terminal hookups get effectively infinite capacity, so any finite cut
//! consists of internal arcs only (Menger). Sources attach at w_in and sinks
//! at y_out, which makes endpoint vertices themselves cuttable, matching the
//! "paths pass through their endpoints" reading of a vertex cut.

use super::{Dag, VertexSet};

const INF: i64 = i64::MAX / 4;

struct FlowNet {
    // Forward-star representation: per arc, target, capacity, and the index
    // of the reverse arc.
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowNet {
    fn new(nodes: usize) -> Self {
        FlowNet {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add(&mut self, u: usize, v: usize, c: i64) {
        let e = self.to.len();
        self.head[u].push(e);
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(e + 1);
        self.to.push(u);
        self.cap.push(0);
    }

    /// One BFS augmenting step (Edmonds-Karp); unit capacities keep the
    /// number of rounds at the flow value.
    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut prev_arc = vec![usize::MAX; self.head.len()];
        let mut seen = vec![false; self.head.len()];
        let mut queue = std::collections::VecDeque::new();
        seen[s] = true;
        queue.push_back(s);
        'bfs: while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if !seen[v] && self.cap[e] > 0 {
                    seen[v] = true;
                    prev_arc[v] = e;
                    if v == t {
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
        }
        if !seen[t] {
            return false;
        }
        let mut v = t;
        while v != s {
            let e = prev_arc[v];
            self.cap[e] -= 1;
            self.cap[e ^ 1] += 1;
            v = self.to[e ^ 1];
        }
        true
    }

    /// Nodes that can still reach `t` in the residual network.
    fn reaches_sink(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        let mut stack = vec![t];
        seen[t] = true;
        while let Some(v) = stack.pop() {
            // u reaches v when the residual arc u->v has capacity; that arc is
            // stored at v's reverse slot, so scan v's incident arcs and test
            // the paired arc.
            for &e in &self.head[v] {
                let u = self.to[e];
                if !seen[u] && self.cap[e ^ 1] > 0 {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }
}

/// Returns the size of the minimum vertex cut from `w` to `y` and the
/// sink-closest minimum cut itself.
pub(super) fn min_vertex_cut(dag: &Dag, w: &VertexSet, y: &VertexSet) -> (usize, VertexSet) {
    let n = dag.n();
    if w.is_empty() || y.is_empty() {
        return (0, VertexSet::new());
    }
    let v_in = |v: usize| 2 * v;
    let v_out = |v: usize| 2 * v + 1;
    let source = 2 * n;
    let sink = 2 * n + 1;

    let mut net = FlowNet::new(2 * n + 2);
    for v in 0..n {
        net.add(v_in(v), v_out(v), 1);
    }
    for &(i, j) in dag.edges() {
        net.add(v_out(i), v_in(j), INF);
    }
    for v in w.iter() {
        net.add(source, v_in(v), INF);
    }
    for v in y.iter() {
        net.add(v_out(v), sink, INF);
    }

    let mut value = 0usize;
    while net.augment(source, sink) {
        value += 1;
    }

    let side = net.reaches_sink(sink);
    let cut: VertexSet = (0..n)
        .filter(|&v| !side[v_in(v)] && side[v_out(v)])
        .collect();
    debug_assert_eq!(cut.len(), value);
    (value, cut)
}
