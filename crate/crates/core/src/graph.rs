//! Undirected weighted graph, paths, problem instances and edge-list I/O.
//!
//! Every edge carries two numbers: `weight`, which contributes to path
//! length, and `cost`, the price of removing it. Node ids are dense in
//! `[0, node_count)` and edges are stored with `u < v`.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used when comparing path lengths.
pub const LENGTH_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    pub cost: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<Edge>,
    /// `(neighbor, edge index)` pairs, sorted by neighbor id.
    adjacency: Vec<Vec<(usize, usize)>>,
    index: HashMap<(usize, usize), usize>,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl WeightedGraph {
    /// Builds a graph from `(u, v, weight, cost)` records.
    ///
    /// Duplicate unordered pairs collapse onto the index of their first
    /// occurrence, keeping the record with the smallest weight.
    pub fn from_edges<I>(node_count: usize, records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64, f64)>,
    {
        let mut edges: Vec<Edge> = Vec::new();
        let mut index = HashMap::new();
        for (u, v, weight, cost) in records {
            if u >= node_count || v >= node_count {
                return Err(Error::validation(format!(
                    "edge ({u}, {v}) references a node outside [0, {node_count})"
                )));
            }
            if u == v {
                return Err(Error::validation(format!("self-loop on node {u}")));
            }
            check_positive(weight, cost, u, v)?;
            let (a, b) = key(u, v);
            let rec = Edge {
                u: a,
                v: b,
                weight,
                cost,
            };
            match index.get(&(a, b)) {
                Some(&i) => {
                    let existing: &mut Edge = &mut edges[i];
                    if weight < existing.weight {
                        *existing = rec;
                    }
                }
                None => {
                    index.insert((a, b), edges.len());
                    edges.push(rec);
                }
            }
        }
        let mut adjacency = vec![Vec::new(); node_count];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, i));
            adjacency[e.v].push((e.u, i));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(WeightedGraph {
            node_count,
            edges,
            adjacency,
            index,
        })
    }

    /// Unit weight and unit cost on every edge.
    pub fn unit<I>(node_count: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(node_count, pairs.into_iter().map(|(u, v)| (u, v, 1.0, 1.0)))
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    /// Neighbors of `v` as `(neighbor, edge index)`, ascending by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&key(u, v)).copied()
    }

    pub fn mean_weight(&self) -> f64 {
        if self.edges.is_empty() {
            return 1.0;
        }
        self.edges.iter().map(|e| e.weight).sum::<f64>() / self.edges.len() as f64
    }

    /// Connected components, each as an ascending node list; largest first,
    /// ties broken by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.node_count];
        let mut out = Vec::new();
        for start in 0..self.node_count {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(x) = stack.pop() {
                comp.push(x);
                for &(y, _) in self.neighbors(x) {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        out
    }

    /// Same graph with node `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.node_count {
            return Err(Error::validation("permutation length differs from node count"));
        }
        Self::from_edges(
            self.node_count,
            self.edges.iter().map(|e| (perm[e.u], perm[e.v], e.weight, e.cost)),
        )
    }
}

fn check_positive(weight: f64, cost: f64, u: usize, v: usize) -> Result<()> {
    if !(weight.is_finite() && weight > 0.0) {
        return Err(Error::validation(format!(
            "edge ({u}, {v}) has non-positive weight {weight}"
        )));
    }
    if !(cost.is_finite() && cost > 0.0) {
        return Err(Error::validation(format!(
            "edge ({u}, {v}) has non-positive cost {cost}"
        )));
    }
    Ok(())
}

/// A set of deleted edge indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeMask {
    bits: Vec<bool>,
    count: usize,
}

impl EdgeMask {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.bits.get(e).copied().unwrap_or(false)
    }

    /// Returns `true` if `e` was not already present.
    pub fn insert(&mut self, e: usize) -> bool {
        if e >= self.bits.len() {
            self.bits.resize(e + 1, false);
        }
        if self.bits[e] {
            false
        } else {
            self.bits[e] = true;
            self.count += 1;
            true
        }
    }

    pub fn remove(&mut self, e: usize) -> bool {
        if self.contains(e) {
            self.bits[e] = false;
            self.count -= 1;
            true
        } else {
            false
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Ascending edge indices.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| if b { Some(i) } else { None })
    }

    pub fn union(&self, other: &EdgeMask) -> EdgeMask {
        let mut out = self.clone();
        out.extend(other.iter());
        out
    }
}

impl Extend<usize> for EdgeMask {
    fn extend<T: IntoIterator<Item = usize>>(&mut self, iter: T) {
        for e in iter {
            self.insert(e);
        }
    }
}

impl FromIterator<usize> for EdgeMask {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut m = EdgeMask::new();
        m.extend(iter);
        m
    }
}

/// A simple path given by its node sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub length: f64,
}

impl Path {
    /// Validates the node sequence against `g` and computes its length.
    pub fn new(g: &WeightedGraph, nodes: Vec<usize>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::validation("empty path"));
        }
        let mut seen = BTreeSet::new();
        for &v in &nodes {
            if v >= g.node_count() {
                return Err(Error::validation(format!("unknown node id {v}")));
            }
            if !seen.insert(v) {
                return Err(Error::validation(format!("node {v} repeats in path")));
            }
        }
        let length = path_length(g, &nodes)?;
        Ok(Path { nodes, length })
    }

    pub fn source(&self) -> usize {
        self.nodes[0]
    }

    pub fn target(&self) -> usize {
        *self.nodes.last().expect("paths are non-empty")
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Edge indices along the path. Panics if a hop is not an edge of `g`.
    pub fn edges(&self, g: &WeightedGraph) -> Vec<usize> {
        self.nodes
            .windows(2)
            .map(|w| g.edge_between(w[0], w[1]).expect("path hop is an edge"))
            .collect()
    }
}

/// Sum of edge weights along `nodes`.
pub fn path_length(g: &WeightedGraph, nodes: &[usize]) -> Result<f64> {
    let mut len = 0.0;
    for w in nodes.windows(2) {
        if w[0] >= g.node_count() || w[1] >= g.node_count() {
            return Err(Error::validation(format!(
                "unknown node id in hop ({}, {})",
                w[0], w[1]
            )));
        }
        match g.edge_between(w[0], w[1]) {
            Some(e) => len += g.edge(e).weight,
            None => {
                return Err(Error::validation(format!(
                    "({}, {}) is not an edge",
                    w[0], w[1]
                )))
            }
        }
    }
    if let Some(&v) = nodes.first() {
        if v >= g.node_count() {
            return Err(Error::validation(format!("unknown node id {v}")));
        }
    }
    Ok(len)
}

/// `true` iff every hop of `p` is an edge of `g` that `mask` has not deleted.
pub fn is_path_valid(g: &WeightedGraph, mask: &EdgeMask, p: &Path) -> Result<bool> {
    for &v in &p.nodes {
        if v >= g.node_count() {
            return Err(Error::validation(format!("unknown node id {v}")));
        }
    }
    Ok(p.nodes.windows(2).all(|w| match g.edge_between(w[0], w[1]) {
        Some(e) => !mask.contains(e),
        None => false,
    }))
}

/// A Force Path Cut instance: make `target_path` the shortest source–target path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathQuery {
    pub source: usize,
    pub target: usize,
    pub target_path: Path,
}

impl PathQuery {
    pub fn new(g: &WeightedGraph, p_star: Vec<usize>) -> Result<Self> {
        let target_path = Path::new(g, p_star)?;
        let (source, target) = (target_path.source(), target_path.target());
        if source == target {
            return Err(Error::validation("source and target coincide"));
        }
        Ok(PathQuery {
            source,
            target,
            target_path,
        })
    }

    /// Edge indices of p*.
    pub fn protected_edges(&self, g: &WeightedGraph) -> Vec<usize> {
        self.target_path.edges(g)
    }
}

/// Node-id and edge-index correspondence between a graph and an induced subgraph.
#[derive(Debug, Clone, Default)]
pub struct SubgraphMap {
    pub to_sub_node: Vec<Option<usize>>,
    pub to_full_node: Vec<usize>,
    pub to_sub_edge: Vec<Option<usize>>,
    pub to_full_edge: Vec<usize>,
}

impl SubgraphMap {
    pub fn sub_path(&self, nodes: &[usize]) -> Option<Vec<usize>> {
        nodes.iter().map(|&v| self.to_sub_node[v]).collect()
    }

    pub fn full_path(&self, nodes: &[usize]) -> Vec<usize> {
        nodes.iter().map(|&v| self.to_full_node[v]).collect()
    }
}

/// Subgraph on the nodes in `keep`, minus edges in `mask`.
///
/// Kept nodes and edges retain their relative order, so tie-breaking on the
/// subgraph agrees with tie-breaking on the full graph.
pub fn induced_subgraph(
    g: &WeightedGraph,
    keep: &BTreeSet<usize>,
    mask: &EdgeMask,
) -> Result<(WeightedGraph, SubgraphMap)> {
    let mut to_sub_node = vec![None; g.node_count()];
    let mut to_full_node = Vec::with_capacity(keep.len());
    for &v in keep {
        if v >= g.node_count() {
            return Err(Error::validation(format!("unknown node id {v}")));
        }
        to_sub_node[v] = Some(to_full_node.len());
        to_full_node.push(v);
    }
    let mut to_sub_edge = vec![None; g.edge_count()];
    let mut to_full_edge = Vec::new();
    let mut records = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        if mask.contains(i) {
            continue;
        }
        if let (Some(a), Some(b)) = (to_sub_node[e.u], to_sub_node[e.v]) {
            to_sub_edge[i] = Some(to_full_edge.len());
            to_full_edge.push(i);
            records.push((a, b, e.weight, e.cost));
        }
    }
    let sub = WeightedGraph::from_edges(to_full_node.len(), records)?;
    Ok((
        sub,
        SubgraphMap {
            to_sub_node,
            to_full_node,
            to_sub_edge,
            to_full_edge,
        },
    ))
}

fn parse_err(path: &FsPath, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

enum Record {
    Edge(String, String, f64, f64),
    Skip,
}

fn parse_line(path: &FsPath, lineno: usize, line: &str) -> Result<Record> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(Record::Skip);
    }
    let fields: Vec<&str> = trimmed.split_whitespace().collect();
    if fields.len() < 2 || fields.len() > 4 {
        return Err(parse_err(
            path,
            lineno,
            format!("expected 2 to 4 fields, found {}", fields.len()),
        ));
    }
    let num = |s: &str, what: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| parse_err(path, lineno, format!("bad {what} `{s}`")))
    };
    let weight = fields.get(2).map(|s| num(s, "weight")).transpose()?.unwrap_or(1.0);
    let cost = fields.get(3).map(|s| num(s, "cost")).transpose()?.unwrap_or(1.0);
    if !(weight > 0.0 && weight.is_finite()) || !(cost > 0.0 && cost.is_finite()) {
        return Err(Error::validation(format!(
            "{}:{lineno}: weight and cost must be positive",
            path.display()
        )));
    }
    Ok(Record::Edge(
        fields[0].to_string(),
        fields[1].to_string(),
        weight,
        cost,
    ))
}

/// Reads `u v [weight [cost]]` lines with integer node ids.
///
/// `node_count` is one more than the largest id seen. Self-loops are
/// dropped with a warning.
pub fn load_edge_list(path: impl AsRef<FsPath>) -> Result<WeightedGraph> {
    let path = path.as_ref();
    let reader = BufReader::new(fs::File::open(path)?);
    let mut records = Vec::new();
    let mut max_id: Option<usize> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if let Record::Edge(a, b, w, c) = parse_line(path, lineno, &line)? {
            let id = |s: &str| -> Result<usize> {
                s.parse::<usize>()
                    .map_err(|_| parse_err(path, lineno, format!("bad node id `{s}`")))
            };
            let (u, v) = (id(&a)?, id(&b)?);
            max_id = Some(max_id.unwrap_or(0).max(u).max(v));
            if u == v {
                log::warn!("{}:{lineno}: dropping self-loop on {u}", path.display());
                continue;
            }
            records.push((u, v, w, c));
        }
    }
    WeightedGraph::from_edges(max_id.map_or(0, |m| m + 1), records)
}

/// Like [`load_edge_list`], but node tokens are arbitrary labels remapped to
/// dense ids in first-seen order. Returns the labels indexed by dense id.
pub fn load_edge_list_relabeled(
    path: impl AsRef<FsPath>,
) -> Result<(WeightedGraph, Vec<String>)> {
    let path = path.as_ref();
    let reader = BufReader::new(fs::File::open(path)?);
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if let Record::Edge(a, b, w, c) = parse_line(path, i + 1, &line)? {
            let mut intern = |s: String| {
                *ids.entry(s.clone()).or_insert_with(|| {
                    labels.push(s);
                    labels.len() - 1
                })
            };
            let (u, v) = (intern(a), intern(b));
            if u != v {
                records.push((u, v, w, c));
            }
        }
    }
    Ok((WeightedGraph::from_edges(labels.len(), records)?, labels))
}

pub fn write_edge_list(g: &WeightedGraph, path: impl AsRef<FsPath>) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# nodes={} edges={}", g.node_count(), g.edge_count())?;
    for e in g.edges() {
        writeln!(out, "{}\t{}\t{}\t{}", e.u, e.v, e.weight, e.cost)?;
    }
    out.flush()?;
    Ok(())
}

/// On-disk instance description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub graph: PathBuf,
    pub source: usize,
    pub target: usize,
    pub p_star: Vec<usize>,
}

impl InstanceFile {
    pub fn read(path: impl AsRef<FsPath>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: impl AsRef<FsPath>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Loads the referenced graph (relative to the instance file's
    /// directory) and builds the query.
    pub fn load(path: impl AsRef<FsPath>) -> Result<(WeightedGraph, PathQuery)> {
        let path = path.as_ref();
        let inst = Self::read(path)?;
        let graph_path = if inst.graph.is_relative() {
            path.parent().unwrap_or(FsPath::new(".")).join(&inst.graph)
        } else {
            inst.graph.clone()
        };
        let g = load_edge_list(graph_path)?;
        let q = PathQuery::new(&g, inst.p_star.clone())?;
        if q.source != inst.source || q.target != inst.target {
            return Err(Error::validation(
                "p_star does not run from source to target",
            ));
        }
        Ok((g, q))
    }
}
