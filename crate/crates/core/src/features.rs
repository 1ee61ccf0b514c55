//! Node features: nine structural measures, s–t max-flow throughput, and
//! personalized PageRank rooted at each edge of p*.

use std::collections::VecDeque;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{PathQuery, WeightedGraph};
use crate::paths::approx_eq;

pub const STRUCTURAL_COLUMNS: [&str; 9] = [
    "degree",
    "clustering",
    "katz",
    "pagerank",
    "eigenvector",
    "constraint",
    "avg_neighbor_clustering",
    "ego_edges",
    "betweenness",
];

pub const PPR_PAD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureFamily {
    Structural,
    Flow,
    Ppr,
}

impl FromStr for FeatureFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "structural" => Ok(FeatureFamily::Structural),
            "flow" => Ok(FeatureFamily::Flow),
            "ppr" => Ok(FeatureFamily::Ppr),
            other => Err(Error::Config(format!("unknown feature family `{other}`"))),
        }
    }
}

impl std::fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FeatureFamily::Structural => "structural",
            FeatureFamily::Flow => "flow",
            FeatureFamily::Ppr => "ppr",
        })
    }
}

/// Parses a comma-separated family list such as `structural,ppr`.
pub fn parse_families(s: &str) -> Result<Vec<FeatureFamily>> {
    if s.trim() == "all" {
        return Ok(vec![FeatureFamily::Structural, FeatureFamily::Flow, FeatureFamily::Ppr]);
    }
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    /// Restart probability of the personalized walks.
    pub restart: f64,
    /// Katz attenuation as a fraction of `1 / λ_max`.
    pub katz_scale: f64,
    pub pad: usize,
    pub normalize: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            restart: 0.15,
            katz_scale: 0.9,
            pad: PPR_PAD,
            normalize: true,
        }
    }
}

/// Row-major node × feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub column_names: Vec<String>,
    pub family_spans: Vec<(FeatureFamily, Range<usize>)>,
}

impl FeatureMatrix {
    fn from_columns(
        rows: usize,
        columns: Vec<Vec<f64>>,
        names: Vec<String>,
        family: FeatureFamily,
    ) -> Self {
        let cols = columns.len();
        let mut values = vec![0.0; rows * cols];
        for (c, col) in columns.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                values[r * cols + c] = v;
            }
        }
        FeatureMatrix {
            rows,
            cols,
            values,
            column_names: names,
            family_spans: vec![(family, 0..cols)],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn span(&self, family: FeatureFamily) -> Option<Range<usize>> {
        self.family_spans
            .iter()
            .find(|(f, _)| *f == family)
            .map(|(_, r)| r.clone())
    }

    /// Horizontal concatenation; spans of `other` are shifted.
    pub fn hconcat(self, other: FeatureMatrix) -> Result<FeatureMatrix> {
        if self.cols == 0 && self.family_spans.is_empty() {
            return Ok(other);
        }
        if self.rows != other.rows {
            return Err(Error::validation("row count mismatch in feature concat"));
        }
        let cols = self.cols + other.cols;
        let mut values = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            values.extend_from_slice(self.row(r));
            values.extend_from_slice(other.row(r));
        }
        let mut spans = self.family_spans;
        spans.extend(
            other
                .family_spans
                .into_iter()
                .map(|(f, s)| (f, s.start + self.cols..s.end + self.cols)),
        );
        let mut names = self.column_names;
        names.extend(other.column_names);
        Ok(FeatureMatrix {
            rows: self.rows,
            cols,
            values,
            column_names: names,
            family_spans: spans,
        })
    }

    /// Per-column z-score (population standard deviation). Constant
    /// columns become all zeros.
    pub fn zscore(&mut self) {
        if self.rows == 0 {
            return;
        }
        for c in 0..self.cols {
            let col = self.column(c);
            let mean = col.iter().sum::<f64>() / self.rows as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.rows as f64;
            let sd = var.sqrt();
            for r in 0..self.rows {
                let v = &mut self.values[r * self.cols + c];
                *v = if sd > 1e-12 * (1.0 + mean.abs()) {
                    (*v - mean) / sd
                } else {
                    0.0
                };
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.column_names)?;
        for r in 0..self.rows {
            w.write_record(self.row(r).iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-node triangle counts.
fn triangles(g: &WeightedGraph) -> Vec<usize> {
    let n = g.node_count();
    let mut mark = vec![usize::MAX; n];
    let mut tri = vec![0usize; n];
    for v in 0..n {
        for &(u, _) in g.neighbors(v) {
            mark[u] = v;
        }
        let mut links = 0;
        for &(u, _) in g.neighbors(v) {
            for &(w, _) in g.neighbors(u) {
                if mark[w] == v {
                    links += 1;
                }
            }
        }
        tri[v] = links / 2;
    }
    tri
}

fn clustering(g: &WeightedGraph, tri: &[usize]) -> Vec<f64> {
    (0..g.node_count())
        .map(|v| {
            let d = g.degree(v);
            if d < 2 {
                0.0
            } else {
                2.0 * tri[v] as f64 / (d * (d - 1)) as f64
            }
        })
        .collect()
}

fn adjacency_mul(g: &WeightedGraph, x: &[f64]) -> Vec<f64> {
    (0..g.node_count())
        .map(|v| g.neighbors(v).iter().map(|&(u, _)| x[u]).sum())
        .collect()
}

fn l2_normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
}

/// Leading adjacency eigenpair by power iteration on `A + I`.
fn leading_eigen(g: &WeightedGraph) -> (f64, Vec<f64>) {
    let n = g.node_count();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let ax = adjacency_mul(g, &x);
        let mut y: Vec<f64> = ax.iter().zip(&x).map(|(a, b)| a + b).collect();
        l2_normalize(&mut y);
        let diff: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        let ax = adjacency_mul(g, &x);
        lambda = ax.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        if diff < 1e-12 * n as f64 {
            break;
        }
    }
    (lambda, x)
}

fn katz(g: &WeightedGraph, lambda_max: f64, scale: f64) -> Vec<f64> {
    let n = g.node_count();
    let mut alpha = if lambda_max > 1e-12 { scale / lambda_max } else { 0.1 };
    loop {
        let mut x = vec![0.0; n];
        let mut converged = false;
        for _ in 0..5_000 {
            let ax = adjacency_mul(g, &x);
            let next: Vec<f64> = ax.iter().map(|v| alpha * v + 1.0).collect();
            let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
            x = next;
            if !x.iter().all(|v| v.is_finite()) || x.iter().any(|v| v.abs() > 1e100) {
                break;
            }
            if diff < 1e-10 * n.max(1) as f64 {
                converged = true;
                break;
            }
        }
        if converged {
            l2_normalize(&mut x);
            return x;
        }
        log::warn!("Katz iteration did not converge at alpha={alpha}; halving alpha");
        alpha /= 2.0;
    }
}

/// PageRank with uniform teleport; dangling mass is spread uniformly.
pub fn pagerank(g: &WeightedGraph, damping: f64) -> Vec<f64> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let uniform = vec![1.0 / n as f64; n];
    walk_with_restart(g, &uniform, 1.0 - damping, &uniform, 1e-13)
}

/// `x = r·e + (1−r)·(Wᵀx + dangling(x)·d)` iterated to L1 residual `< tol`,
/// where `W` is the uniform random-walk transition matrix.
fn walk_with_restart(
    g: &WeightedGraph,
    restart_to: &[f64],
    restart: f64,
    dangling_to: &[f64],
    tol: f64,
) -> Vec<f64> {
    let n = g.node_count();
    let mut x = restart_to.to_vec();
    for _ in 0..100_000 {
        let mut next: Vec<f64> = restart_to.iter().map(|v| restart * v).collect();
        let mut dangling = 0.0;
        for v in 0..n {
            let d = g.degree(v);
            if d == 0 {
                dangling += x[v];
                continue;
            }
            let share = (1.0 - restart) * x[v] / d as f64;
            for &(u, _) in g.neighbors(v) {
                next[u] += share;
            }
        }
        if dangling > 0.0 {
            for (v, nv) in next.iter_mut().enumerate() {
                *nv += (1.0 - restart) * dangling * dangling_to[v];
            }
        }
        let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if diff < tol {
            break;
        }
    }
    x
}

/// Personalized PageRank with restart probability `restart` to the
/// distribution `personalization`. Walkers stuck on isolated nodes restart.
pub fn personalized_pagerank(
    g: &WeightedGraph,
    personalization: &[f64],
    restart: f64,
) -> Result<Vec<f64>> {
    if personalization.len() != g.node_count() {
        return Err(Error::validation("personalization length differs from node count"));
    }
    if !(restart > 0.0 && restart <= 1.0) {
        return Err(Error::Config(format!("restart probability {restart} outside (0, 1]")));
    }
    Ok(walk_with_restart(g, personalization, restart, personalization, 1e-12))
}

/// Burt's structural-holes constraint on the unweighted graph.
fn burt_constraint(g: &WeightedGraph) -> Vec<f64> {
    let n = g.node_count();
    let mut mark = vec![usize::MAX; n];
    (0..n)
        .map(|i| {
            let di = g.degree(i);
            if di == 0 {
                return 0.0;
            }
            for &(q, _) in g.neighbors(i) {
                mark[q] = i;
            }
            let p_i = 1.0 / di as f64;
            g.neighbors(i)
                .iter()
                .map(|&(j, _)| {
                    // indirect: i -> q -> j through shared neighbors q
                    let indirect: f64 = g
                        .neighbors(j)
                        .iter()
                        .filter(|&&(q, _)| q != i && mark[q] == i)
                        .map(|&(q, _)| p_i / g.degree(q) as f64)
                        .sum();
                    (p_i + indirect).powi(2)
                })
                .sum()
        })
        .collect()
}

/// Brandes betweenness on edge weights; raw unordered-pair counts,
/// endpoints excluded.
pub fn betweenness(g: &WeightedGraph) -> Vec<f64> {
    use std::collections::BinaryHeap;
    #[derive(PartialEq)]
    struct Item(f64, usize);
    impl Eq for Item {}
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }

    let n = g.node_count();
    let mut bc = vec![0.0; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut sigma = vec![0.0; n];
    let mut delta = vec![0.0; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut done = vec![false; n];
    for s in 0..n {
        for v in 0..n {
            dist[v] = f64::INFINITY;
            sigma[v] = 0.0;
            delta[v] = 0.0;
            preds[v].clear();
            done[v] = false;
        }
        let mut order = Vec::new();
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        sigma[s] = 1.0;
        heap.push(Item(0.0, s));
        while let Some(Item(d, u)) = heap.pop() {
            if done[u] || d > dist[u] {
                continue;
            }
            done[u] = true;
            order.push(u);
            for &(v, e) in g.neighbors(u) {
                if done[v] {
                    continue;
                }
                let nd = d + g.edge(e).weight;
                if approx_eq(nd, dist[v]) {
                    sigma[v] += sigma[u];
                    preds[v].push(u);
                } else if nd < dist[v] {
                    dist[v] = nd;
                    sigma[v] = sigma[u];
                    preds[v].clear();
                    preds[v].push(u);
                    heap.push(Item(nd, v));
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    for v in bc.iter_mut() {
        *v /= 2.0;
    }
    bc
}

/// The nine structural columns, unnormalized.
pub fn structural_features(g: &WeightedGraph, cfg: &FeatureConfig) -> FeatureMatrix {
    let n = g.node_count();
    let tri = triangles(g);
    let cc = clustering(g, &tri);
    let degree: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
    let (lambda, mut eig) = leading_eigen(g);
    // make the Perron vector non-negative
    if eig.iter().sum::<f64>() < 0.0 {
        eig.iter_mut().for_each(|v| *v = -*v);
    }
    let katz = katz(g, lambda, cfg.katz_scale);
    let pr = pagerank(g, 0.85);
    let constraint = burt_constraint(g);
    let avg_nbr_cc: Vec<f64> = (0..n)
        .map(|v| {
            let d = g.degree(v);
            if d == 0 {
                0.0
            } else {
                g.neighbors(v).iter().map(|&(u, _)| cc[u]).sum::<f64>() / d as f64
            }
        })
        .collect();
    let ego: Vec<f64> = (0..n).map(|v| (g.degree(v) + tri[v]) as f64).collect();
    let bc = betweenness(g);
    FeatureMatrix::from_columns(
        n,
        vec![degree, cc, katz, pr, eig, constraint, avg_nbr_cc, ego, bc],
        STRUCTURAL_COLUMNS.iter().map(|s| s.to_string()).collect(),
        FeatureFamily::Structural,
    )
}

/// Exact s–t maximum flow with edge weights as undirected capacities.
#[derive(Debug, Clone)]
pub struct MaxFlow {
    pub value: f64,
    /// Net flow per edge, positive in the `u → v` direction of the stored edge.
    pub edge_flow: Vec<f64>,
}

/// Dinic's algorithm. Each undirected edge is one pair of arcs that serve
/// as each other's residual.
pub fn max_flow(g: &WeightedGraph, s: usize, t: usize) -> MaxFlow {
    const EPS: f64 = 1e-12;
    let n = g.node_count();
    let m = g.edge_count();
    // arc 2e: u -> v, arc 2e+1: v -> u
    let mut residual: Vec<f64> = Vec::with_capacity(2 * m);
    let mut head: Vec<usize> = Vec::with_capacity(2 * m);
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in g.edges().iter().enumerate() {
        residual.push(e.weight);
        residual.push(e.weight);
        head.push(e.v);
        head.push(e.u);
        out[e.u].push(2 * i);
        out[e.v].push(2 * i + 1);
    }
    let mut value = 0.0;
    if s == t || s >= n || t >= n {
        return MaxFlow {
            value,
            edge_flow: vec![0.0; m],
        };
    }
    let mut level = vec![usize::MAX; n];
    let mut next = vec![0usize; n];

    fn augment(
        u: usize,
        t: usize,
        pushed: f64,
        residual: &mut [f64],
        head: &[usize],
        out: &[Vec<usize>],
        level: &[usize],
        next: &mut [usize],
    ) -> f64 {
        if u == t {
            return pushed;
        }
        while next[u] < out[u].len() {
            let a = out[u][next[u]];
            let v = head[a];
            if residual[a] > EPS && level[v] == level[u] + 1 {
                let got = augment(v, t, pushed.min(residual[a]), residual, head, out, level, next);
                if got > EPS {
                    residual[a] -= got;
                    residual[a ^ 1] += got;
                    return got;
                }
            }
            next[u] += 1;
        }
        0.0
    }

    loop {
        level.iter_mut().for_each(|l| *l = usize::MAX);
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &out[u] {
                let v = head[a];
                if residual[a] > EPS && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if level[t] == usize::MAX {
            break;
        }
        next.iter_mut().for_each(|x| *x = 0);
        loop {
            let got = augment(s, t, f64::INFINITY, &mut residual, &head, &out, &level, &mut next);
            if got <= EPS {
                break;
            }
            value += got;
        }
    }
    let edge_flow = (0..m)
        .map(|i| (residual[2 * i + 1] - residual[2 * i]) / 2.0)
        .collect();
    MaxFlow { value, edge_flow }
}

/// One column: half the absolute flow through each node's incident edges;
/// source and target carry the full flow value.
pub fn max_flow_feature(g: &WeightedGraph, query: &PathQuery) -> FeatureMatrix {
    let n = g.node_count();
    let flow = max_flow(g, query.source, query.target);
    let mut col = vec![0.0; n];
    for (i, e) in g.edges().iter().enumerate() {
        let f = flow.edge_flow[i].abs();
        col[e.u] += f / 2.0;
        col[e.v] += f / 2.0;
    }
    if flow.value > 0.0 {
        col[query.source] = flow.value;
        col[query.target] = flow.value;
    } else {
        col.iter_mut().for_each(|v| *v = 0.0);
    }
    FeatureMatrix::from_columns(n, vec![col], vec!["max_flow".into()], FeatureFamily::Flow)
}

/// One personalized PageRank column per p* edge, mass split evenly on its
/// endpoints, zero-padded to `cfg.pad` columns.
pub fn ppr_along_pstar(
    g: &WeightedGraph,
    query: &PathQuery,
    cfg: &FeatureConfig,
) -> Result<FeatureMatrix> {
    let n = g.node_count();
    let hops = query.target_path.edge_count();
    if hops > cfg.pad {
        return Err(Error::Config(format!(
            "p* has {hops} edges, more than the pad width {}",
            cfg.pad
        )));
    }
    let mut columns = Vec::with_capacity(cfg.pad);
    for w in query.target_path.nodes.windows(2) {
        let mut e = vec![0.0; n];
        e[w[0]] += 0.5;
        e[w[1]] += 0.5;
        columns.push(personalized_pagerank(g, &e, cfg.restart)?);
    }
    columns.resize(cfg.pad, vec![0.0; n]);
    Ok(FeatureMatrix::from_columns(
        n,
        columns,
        (0..cfg.pad).map(|j| format!("ppr_{j}")).collect(),
        FeatureFamily::Ppr,
    ))
}

/// Concatenates the requested families in the fixed order structural,
/// flow, ppr, then z-scores each column when `cfg.normalize` is set.
pub fn assemble(
    g: &WeightedGraph,
    query: &PathQuery,
    families: &[FeatureFamily],
    cfg: &FeatureConfig,
) -> Result<FeatureMatrix> {
    let want = |f| families.contains(&f);
    let mut m = FeatureMatrix {
        rows: g.node_count(),
        cols: 0,
        values: Vec::new(),
        column_names: Vec::new(),
        family_spans: Vec::new(),
    };
    if want(FeatureFamily::Structural) {
        m = m.hconcat(structural_features(g, cfg))?;
    }
    if want(FeatureFamily::Flow) {
        m = m.hconcat(max_flow_feature(g, query))?;
    }
    if want(FeatureFamily::Ppr) {
        m = m.hconcat(ppr_along_pstar(g, query, cfg)?)?;
    }
    if cfg.normalize {
        m.zscore();
    }
    if !m.is_finite() {
        return Err(Error::Numeric {
            layer: "features".into(),
        });
    }
    Ok(m)
}
