//! Dijkstra under an edge mask and Yen's k shortest simple paths.
//!
//! Ties are broken deterministically. Within a shortest-path tree a node's
//! parent is its smallest-id tight predecessor. Whole s–t paths of equal
//! length are ordered lexicographically by node sequence; the path returned
//! by [`shortest_path`] is the lexicographically smallest shortest path, so
//! it always coincides with the first result of [`k_shortest_paths`].

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use crate::graph::{EdgeMask, Path, PathQuery, WeightedGraph, LENGTH_EPS};

#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTree {
    pub source: usize,
    /// `f64::INFINITY` for unreachable nodes.
    pub dist: Vec<f64>,
    pub parent_edge: Vec<Option<usize>>,
}

impl ShortestPathTree {
    /// Node sequence from the tree root to `v`.
    pub fn path_to(&self, g: &WeightedGraph, v: usize) -> Option<Vec<usize>> {
        if !self.dist[v].is_finite() {
            return None;
        }
        let mut nodes = vec![v];
        let mut cur = v;
        while let Some(e) = self.parent_edge[cur] {
            cur = g.edge(e).other(cur);
            nodes.push(cur);
        }
        nodes.reverse();
        Some(nodes)
    }
}

pub(crate) fn approx_eq(a: f64, b: f64) -> bool {
    if !(a.is_finite() && b.is_finite()) {
        return a == b;
    }
    (a - b).abs() <= LENGTH_EPS * 1f64.max(a.abs()).max(b.abs())
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over edges accepted by `edge_ok` and nodes accepted by
/// `node_ok`; stops early once `stop_at` is settled.
fn dijkstra_filtered(
    g: &WeightedGraph,
    source: usize,
    edge_ok: &dyn Fn(usize) -> bool,
    node_ok: &dyn Fn(usize) -> bool,
    stop_at: Option<usize>,
) -> ShortestPathTree {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, u)) = heap.pop() {
        if settled[u] || d > dist[u] {
            continue;
        }
        settled[u] = true;
        if Some(u) == stop_at {
            break;
        }
        for &(v, e) in g.neighbors(u) {
            if settled[v] || !edge_ok(e) || !node_ok(v) {
                continue;
            }
            let nd = d + g.edge(e).weight;
            if approx_eq(nd, dist[v]) {
                // tie: prefer the smaller predecessor id, then smaller edge index
                let better = match parent[v] {
                    None => true,
                    Some(pe) => {
                        let pu = g.edge(pe).other(v);
                        (u, e) < (pu, pe)
                    }
                };
                if better {
                    parent[v] = Some(e);
                }
            } else if nd < dist[v] {
                dist[v] = nd;
                parent[v] = Some(e);
                heap.push(Entry(nd, v));
            }
        }
    }
    ShortestPathTree {
        source,
        dist,
        parent_edge: parent,
    }
}

/// Exact single-source distances ignoring edges in `mask`.
pub fn dijkstra(g: &WeightedGraph, mask: &EdgeMask, source: usize) -> ShortestPathTree {
    dijkstra_filtered(g, source, &|e| !mask.contains(e), &|_| true, None)
}

/// Lexicographically smallest shortest path from `s` to `t`.
///
/// Runs Dijkstra rooted at `t`; each node's parent is then its smallest-id
/// neighbor on a shortest route to `t`, so following parents from `s` walks
/// the lexicographically smallest path.
fn lexmin_shortest(
    g: &WeightedGraph,
    s: usize,
    t: usize,
    edge_ok: &dyn Fn(usize) -> bool,
    node_ok: &dyn Fn(usize) -> bool,
) -> Option<Path> {
    let tree = dijkstra_filtered(g, t, edge_ok, node_ok, Some(s));
    if !tree.dist[s].is_finite() {
        return None;
    }
    let mut nodes = vec![s];
    let mut cur = s;
    let mut length = 0.0;
    while let Some(e) = tree.parent_edge[cur] {
        length += g.edge(e).weight;
        cur = g.edge(e).other(cur);
        nodes.push(cur);
    }
    debug_assert_eq!(cur, t);
    Some(Path { nodes, length })
}

pub fn shortest_path_between(
    g: &WeightedGraph,
    mask: &EdgeMask,
    source: usize,
    target: usize,
) -> Option<Path> {
    lexmin_shortest(g, source, target, &|e| !mask.contains(e), &|_| true)
}

/// The deterministic shortest source–target path, or `None` if disconnected.
pub fn shortest_path(g: &WeightedGraph, mask: &EdgeMask, query: &PathQuery) -> Option<Path> {
    shortest_path_between(g, mask, query.source, query.target)
}

#[derive(Debug, Clone, PartialEq)]
struct Candidate {
    length: f64,
    nodes: Vec<usize>,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.length
            .total_cmp(&other.length)
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn sequential_length(g: &WeightedGraph, nodes: &[usize]) -> f64 {
    nodes
        .windows(2)
        .map(|w| g.edge(g.edge_between(w[0], w[1]).expect("hop is an edge")).weight)
        .sum()
}

/// The `k` shortest loopless source–target paths (Yen), ordered by length
/// and then lexicographically by node sequence.
pub fn k_shortest_paths(
    g: &WeightedGraph,
    mask: &EdgeMask,
    source: usize,
    target: usize,
    k: usize,
) -> Vec<Path> {
    let mut found: Vec<Path> = Vec::new();
    if k == 0 || source >= g.node_count() || target >= g.node_count() {
        return found;
    }
    let Some(first) = shortest_path_between(g, mask, source, target) else {
        return found;
    };
    let length = sequential_length(g, &first.nodes);
    found.push(Path {
        nodes: first.nodes,
        length,
    });
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(found[0].nodes.clone());
    let mut pool: BTreeSet<Candidate> = BTreeSet::new();
    let mut node_blocked = vec![false; g.node_count()];

    while found.len() < k {
        let prev = found.last().expect("non-empty").nodes.clone();
        for i in 0..prev.len() - 1 {
            let spur = prev[i];
            let root = &prev[..=i];
            let mut edge_blocked: HashSet<usize> = HashSet::new();
            for p in &found {
                if p.nodes.len() > i + 1 && p.nodes[..=i] == *root {
                    if let Some(e) = g.edge_between(p.nodes[i], p.nodes[i + 1]) {
                        edge_blocked.insert(e);
                    }
                }
            }
            for &v in &root[..i] {
                node_blocked[v] = true;
            }
            let spur_path = lexmin_shortest(
                g,
                spur,
                target,
                &|e| !mask.contains(e) && !edge_blocked.contains(&e),
                &|v| !node_blocked[v],
            );
            for &v in &root[..i] {
                node_blocked[v] = false;
            }
            if let Some(sp) = spur_path {
                let mut nodes = root[..i].to_vec();
                nodes.extend_from_slice(&sp.nodes);
                if !seen.contains(&nodes) {
                    let length = sequential_length(g, &nodes);
                    pool.insert(Candidate { length, nodes });
                }
            }
        }
        let Some(best) = pool.pop_first() else {
            break;
        };
        seen.insert(best.nodes.clone());
        found.push(Path {
            nodes: best.nodes,
            length: best.length,
        });
    }
    found
}
