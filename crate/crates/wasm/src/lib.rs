//! WebAssembly bindings for the browser demo in `www/`.
//!
//! A [`Demo`] holds one generated graph, a sampled path instance and a
//! layout. Every method returns a JSON string so the page needs no glue
//! beyond `JSON.parse`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use grasp_core::attack::{baseline_greedy, is_attack_valid, pathattack, AttackOptions, AttackResult, CoverBackend};
use grasp_core::graph::{EdgeMask, PathQuery, WeightedGraph};
use grasp_core::grasp::{grasp_with_scores, select_nodes, GraspConfig, IterationRecord};
use grasp_core::paths::shortest_path;
use grasp_core::scoring::{constant_scores, detour_margin_scores, NodeScore};
use grasp_core::synthgen::{generate, sample_instance, GeneratorParams};

/// Largest graph the page will build; layout is quadratic in n.
pub const MAX_NODES: usize = 400;

#[derive(Serialize)]
struct GraphView<'a> {
    family: &'a str,
    n: usize,
    m: usize,
    /// Node positions in the unit square.
    positions: &'a [(f64, f64)],
    edges: Vec<(usize, usize)>,
    source: usize,
    target: usize,
    p_star: &'a [usize],
    p_star_edges: Vec<usize>,
    /// The unattacked shortest path.
    shortest: Vec<usize>,
}

#[derive(Serialize)]
struct ScoreView {
    scores: Vec<f64>,
    percentile: f64,
    kept: Vec<usize>,
    kept_edges: usize,
}

#[derive(Serialize)]
struct AttackView {
    method: String,
    cut_edges: Vec<usize>,
    total_cost: f64,
    valid: bool,
    wall_time_ms: f64,
    subproblem_edges: usize,
    reduction_pct: f64,
    pathattack_calls: usize,
    constraints: usize,
    trace: Vec<IterationRecord>,
    /// Shortest path after the cut; equals p* when the attack worked.
    shortest_after: Vec<usize>,
}

#[wasm_bindgen]
pub struct Demo {
    family: String,
    graph: WeightedGraph,
    query: PathQuery,
    positions: Vec<(f64, f64)>,
}

fn params(family: &str, n: usize) -> Result<GeneratorParams, String> {
    Ok(match family {
        "lattice" => {
            let side = ((n as f64).sqrt().round() as usize).max(2);
            GeneratorParams::Lattice { rows: side, cols: side }
        }
        "er" => GeneratorParams::Er { n, p: 6.0 / (n - 1) as f64 },
        "ba" => GeneratorParams::Ba { n, m: 3 },
        "ws" => GeneratorParams::Ws { n, k: 6, p_rewire: 0.05 },
        other => return Err(format!("unknown family `{other}`")),
    })
}

#[wasm_bindgen]
impl Demo {
    /// Generates a graph and samples an instance whose p* is the
    /// `k_star`-th shortest path.
    #[wasm_bindgen(constructor)]
    pub fn new(family: &str, n: usize, k_star: usize, seed: u32) -> Result<Demo, String> {
        if !(8..=MAX_NODES).contains(&n) {
            return Err(format!("n must be between 8 and {MAX_NODES}"));
        }
        if k_star == 0 {
            return Err("k* must be at least 1".into());
        }
        let p = params(family, n)?;
        let graph = generate(&p, seed as u64).map_err(|e| e.to_string())?;
        let query = sample_instance(&graph, k_star, seed as u64).map_err(|e| e.to_string())?;
        let positions = match p {
            GeneratorParams::Lattice { rows, cols } => grid_layout(rows, cols),
            _ => spring_layout(&graph, 300),
        };
        Ok(Demo {
            family: family.to_string(),
            graph,
            query,
            positions,
        })
    }

    /// Graph, layout and instance.
    pub fn view(&self) -> String {
        let g = &self.graph;
        let shortest = shortest_path(g, &EdgeMask::new(), &self.query).map(|p| p.nodes).unwrap_or_default();
        let v = GraphView {
            family: &self.family,
            n: g.node_count(),
            m: g.edge_count(),
            positions: &self.positions,
            edges: g.edges().iter().map(|e| (e.u, e.v)).collect(),
            source: self.query.source,
            target: self.query.target,
            p_star: &self.query.target_path.nodes,
            p_star_edges: self.query.protected_edges(g),
            shortest,
        };
        serde_json::to_string(&v).expect("view serializes")
    }

    /// Node scores and the nodes kept at `percentile`.
    pub fn scores(&self, scorer: &str, percentile: f64) -> Result<String, String> {
        let s = self.score(scorer)?;
        let kept = select_nodes(&s, percentile, &self.query);
        let kept_edges = self
            .graph
            .edges()
            .iter()
            .filter(|e| kept.contains(&e.u) && kept.contains(&e.v))
            .count();
        let v = ScoreView {
            scores: s.scores,
            percentile,
            kept: kept.into_iter().collect(),
            kept_edges,
        };
        Ok(serde_json::to_string(&v).expect("scores serialize"))
    }

    /// Runs `pathattack`, `baseline` or `grasp` and reports the cut.
    pub fn attack(
        &self,
        method: &str,
        cover: &str,
        scorer: &str,
        start_pct: f64,
        decrement: f64,
    ) -> Result<String, String> {
        let g = &self.graph;
        let q = &self.query;
        let cover: CoverBackend = cover.parse().map_err(|e: grasp_core::Error| e.to_string())?;
        let none = EdgeMask::new();
        let (result, trace): (AttackResult, Vec<IterationRecord>) = match method {
            "pathattack" => {
                let opts = AttackOptions { cover, ..AttackOptions::default() };
                (pathattack(g, &none, q, &opts).map_err(|e| e.to_string())?, Vec::new())
            }
            "baseline" => (baseline_greedy(g, &none, q, false).map_err(|e| e.to_string())?, Vec::new()),
            "grasp" => {
                let cfg = GraspConfig {
                    start_percentile: start_pct,
                    decrement,
                    cover,
                    ..GraspConfig::default()
                };
                let scores = self.score(scorer)?;
                let out = grasp_with_scores(g, q, &cfg, &scores).map_err(|e| e.to_string())?;
                (out.result, out.trace.iterations)
            }
            other => return Err(format!("unknown method `{other}`")),
        };
        let mask: EdgeMask = result.cut_edges.iter().copied().collect();
        let m = g.edge_count();
        let v = AttackView {
            method: method.to_string(),
            valid: result.valid && is_attack_valid(g, &mask, q, false),
            total_cost: result.total_cost,
            wall_time_ms: result.wall_time_ms,
            subproblem_edges: result.subproblem_edges,
            reduction_pct: 100.0 * (1.0 - result.subproblem_edges as f64 / m.max(1) as f64),
            pathattack_calls: result.pathattack_calls,
            constraints: result.constraints_generated,
            trace,
            shortest_after: shortest_path(g, &mask, q).map(|p| p.nodes).unwrap_or_default(),
            cut_edges: result.cut_edges,
        };
        Ok(serde_json::to_string(&v).expect("attack serializes"))
    }
}

impl Demo {
    fn score(&self, scorer: &str) -> Result<NodeScore, String> {
        match scorer {
            "detour" => Ok(detour_margin_scores(&self.graph, &EdgeMask::new(), &self.query)),
            "constant" => Ok(constant_scores(&self.graph)),
            other => Err(format!("scorer `{other}` is not available in the demo")),
        }
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn query(&self) -> &PathQuery {
        &self.query
    }
}

fn grid_layout(rows: usize, cols: usize) -> Vec<(f64, f64)> {
    let span = |k: usize, len: usize| if len < 2 { 0.5 } else { 0.05 + 0.9 * k as f64 / (len - 1) as f64 };
    (0..rows * cols).map(|v| (span(v % cols, cols), span(v / cols, rows))).collect()
}

/// Fruchterman–Reingold from a circle, with a linearly cooling step;
/// deterministic, scaled into the unit square.
pub fn spring_layout(g: &WeightedGraph, iterations: usize) -> Vec<(f64, f64)> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let mut pos: Vec<(f64, f64)> = (0..n)
        .map(|v| {
            let a = std::f64::consts::TAU * v as f64 / n as f64;
            (0.5 + 0.4 * a.cos(), 0.5 + 0.4 * a.sin())
        })
        .collect();
    let k = (1.0 / n as f64).sqrt();
    for it in 0..iterations {
        let temp = 0.1 * (1.0 - it as f64 / iterations as f64);
        let mut disp = vec![(0.0, 0.0); n];
        for a in 0..n {
            for b in a + 1..n {
                let (dx, dy) = (pos[a].0 - pos[b].0, pos[a].1 - pos[b].1);
                let d2 = (dx * dx + dy * dy).max(1e-9);
                let f = k * k / d2;
                disp[a].0 += dx * f;
                disp[a].1 += dy * f;
                disp[b].0 -= dx * f;
                disp[b].1 -= dy * f;
            }
        }
        for e in g.edges() {
            let (dx, dy) = (pos[e.u].0 - pos[e.v].0, pos[e.u].1 - pos[e.v].1);
            let d = (dx * dx + dy * dy).sqrt().max(1e-9);
            let f = d / k;
            disp[e.u].0 -= dx * f;
            disp[e.u].1 -= dy * f;
            disp[e.v].0 += dx * f;
            disp[e.v].1 += dy * f;
        }
        for v in 0..n {
            let (dx, dy) = disp[v];
            let len = (dx * dx + dy * dy).sqrt();
            if len > 0.0 {
                let step = len.min(temp);
                pos[v].0 += dx / len * step;
                pos[v].1 += dy / len * step;
            }
        }
    }
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pos {
        lo_x = lo_x.min(x);
        hi_x = hi_x.max(x);
        lo_y = lo_y.min(y);
        hi_y = hi_y.max(y);
    }
    let sx = (hi_x - lo_x).max(1e-9);
    let sy = (hi_y - lo_y).max(1e-9);
    pos.iter()
        .map(|&(x, y)| (0.05 + 0.9 * (x - lo_x) / sx, 0.05 + 0.9 * (y - lo_y) / sy))
        .collect()
}
