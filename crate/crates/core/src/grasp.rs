//! Subgraph-accelerated attack: score nodes once, solve on the subgraph of
//! top-scoring nodes, check the answer on the full graph, and widen the
//! subgraph until it holds. Edges cut at one threshold stay cut at the next.

use std::collections::BTreeSet;
use std::io::Write;
use web_time::Instant;

use serde::Serialize;

use crate::attack::{is_attack_valid, pathattack, prune_cut, AttackOptions, AttackResult, CoverBackend};
use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, EdgeMask, PathQuery, WeightedGraph};
use crate::scoring::{NodeScore, Scorer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspConfig {
    pub start_percentile: f64,
    pub decrement: f64,
    pub cover: CoverBackend,
    pub strict: bool,
    pub seed: u64,
}

impl Default for GraspConfig {
    fn default() -> Self {
        GraspConfig {
            start_percentile: 95.0,
            decrement: 10.0,
            cover: CoverBackend::Greedy,
            strict: false,
            seed: 0,
        }
    }
}

impl GraspConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.start_percentile > 0.0 && self.start_percentile <= 100.0) {
            return Err(Error::Config(format!(
                "start percentile {} outside (0, 100]",
                self.start_percentile
            )));
        }
        if !(self.decrement > 0.0 && self.decrement <= self.start_percentile) {
            return Err(Error::Config(format!(
                "decrement {} outside (0, {}]",
                self.decrement, self.start_percentile
            )));
        }
        Ok(())
    }

    /// Thresholds tried in order, ending at 0 (the whole remaining graph).
    pub fn schedule(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0;
        loop {
            let t = self.start_percentile - i as f64 * self.decrement;
            if t <= 1e-9 {
                break;
            }
            out.push(t);
            i += 1;
        }
        out.push(0.0);
        out
    }

    fn attack_options(&self) -> AttackOptions {
        AttackOptions {
            cover: self.cover,
            strict: self.strict,
            seed: self.seed,
            budget: None,
        }
    }
}

/// Nodes scoring at or above the `percentile`-th nearest-rank value, plus
/// every node of p*.
///
/// The cut-off is the value at ascending rank `⌊percentile·n/100⌋ + 1`, so
/// with distinct scores exactly `n − ⌊percentile·n/100⌋` nodes pass; ties
/// at the cut-off are all kept.
pub fn select_nodes(scores: &NodeScore, percentile: f64, query: &PathQuery) -> BTreeSet<usize> {
    let n = scores.len();
    let mut keep: BTreeSet<usize> = query.target_path.nodes.iter().copied().collect();
    keep.insert(query.source);
    keep.insert(query.target);
    if n == 0 {
        return keep;
    }
    let below = ((percentile.clamp(0.0, 100.0) * n as f64) / 100.0 + 1e-9).floor() as usize;
    if below >= n {
        return keep;
    }
    let mut sorted = scores.scores.clone();
    sorted.sort_by(f64::total_cmp);
    let cutoff = sorted[below];
    keep.extend((0..n).filter(|&v| scores.scores[v] >= cutoff));
    keep
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub threshold: f64,
    pub subgraph_nodes: usize,
    pub subgraph_edges: usize,
    /// Full-graph edges cut at this step.
    pub step_cut: Vec<usize>,
    pub constraints: usize,
    /// Cumulative deleted edges after this step.
    pub cumulative_deleted: usize,
    pub valid: bool,
    /// The subproblem itself was infeasible; the threshold was lowered.
    pub infeasible: bool,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GraspTrace {
    pub iterations: Vec<IterationRecord>,
}

impl GraspTrace {
    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for rec in &self.iterations {
            serde_json::to_writer(&mut out, rec)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspOutcome {
    pub result: AttackResult,
    pub trace: GraspTrace,
    /// Time spent producing node scores (features + inference).
    pub score_time_ms: f64,
    pub final_threshold: f64,
}

/// Runs the threshold schedule with precomputed scores.
pub fn grasp_with_scores(
    g: &WeightedGraph,
    query: &PathQuery,
    cfg: &GraspConfig,
    scores: &NodeScore,
) -> Result<GraspOutcome> {
    cfg.validate()?;
    if scores.len() != g.node_count() {
        return Err(Error::validation("score vector length differs from node count"));
    }
    let start = Instant::now();
    let opts = cfg.attack_options();
    let mut deleted = EdgeMask::new();
    let mut trace = GraspTrace::default();
    let mut valid = is_attack_valid(g, &deleted, query, cfg.strict);
    let mut calls = 0;
    let mut constraints = 0;
    let mut last_nodes = 0;
    let mut last_edges = 0;
    let mut final_threshold = cfg.start_percentile;
    if valid {
        let keep = select_nodes(scores, cfg.start_percentile, query);
        let (sub, _) = induced_subgraph(g, &keep, &deleted)?;
        last_nodes = sub.node_count();
        last_edges = sub.edge_count();
        trace.iterations.push(IterationRecord {
            threshold: cfg.start_percentile,
            subgraph_nodes: last_nodes,
            subgraph_edges: last_edges,
            step_cut: Vec::new(),
            constraints: 0,
            cumulative_deleted: 0,
            valid: true,
            infeasible: false,
            wall_time_ms: 0.0,
        });
    }
    for threshold in cfg.schedule() {
        if valid {
            break;
        }
        let step_start = Instant::now();
        final_threshold = threshold;
        let keep = select_nodes(scores, threshold, query);
        let (sub, map) = induced_subgraph(g, &keep, &deleted)?;
        last_nodes = sub.node_count();
        last_edges = sub.edge_count();
        let sub_p = map
            .sub_path(&query.target_path.nodes)
            .expect("p* nodes are always kept");
        let sub_query = PathQuery::new(&sub, sub_p)?;
        calls += 1;
        let step = match pathattack(&sub, &EdgeMask::new(), &sub_query, &opts) {
            Ok(r) => r,
            Err(Error::Infeasible { .. }) if threshold > 0.0 => {
                trace.iterations.push(IterationRecord {
                    threshold,
                    subgraph_nodes: last_nodes,
                    subgraph_edges: last_edges,
                    step_cut: Vec::new(),
                    constraints: 0,
                    cumulative_deleted: deleted.len(),
                    valid: false,
                    infeasible: true,
                    wall_time_ms: step_start.elapsed().as_secs_f64() * 1e3,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        constraints += step.constraints_generated;
        let step_cut: Vec<usize> = step.cut_edges.iter().map(|&e| map.to_full_edge[e]).collect();
        deleted.extend(step_cut.iter().copied());
        valid = is_attack_valid(g, &deleted, query, cfg.strict);
        trace.iterations.push(IterationRecord {
            threshold,
            subgraph_nodes: last_nodes,
            subgraph_edges: last_edges,
            step_cut,
            constraints: step.constraints_generated,
            cumulative_deleted: deleted.len(),
            valid,
            infeasible: false,
            wall_time_ms: step_start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let mut cut: Vec<usize> = deleted.iter().collect();
    if valid && calls > 1 {
        // deletions carried over from narrower subgraphs may have become redundant
        cut = prune_cut(g, &EdgeMask::new(), query, cfg.strict, cut);
    }
    let total_cost = cut.iter().map(|&e| g.edge(e).cost).sum();
    Ok(GraspOutcome {
        result: AttackResult {
            cut_edges: cut,
            total_cost,
            valid,
            pathattack_calls: calls,
            constraints_generated: constraints,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            subproblem_nodes: last_nodes,
            subproblem_edges: last_edges,
        },
        trace,
        score_time_ms: 0.0,
        final_threshold,
    })
}

/// Scores nodes with `scorer` on the full graph, then runs the schedule.
pub fn grasp_attack(
    g: &WeightedGraph,
    query: &PathQuery,
    cfg: &GraspConfig,
    scorer: &Scorer<'_>,
) -> Result<GraspOutcome> {
    cfg.validate()?;
    let t0 = Instant::now();
    let scores = scorer.score(g, query)?;
    let score_time_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut out = grasp_with_scores(g, query, cfg, &scores)?;
    out.score_time_ms = score_time_ms;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Path;

    fn query_on_line(n: usize) -> (WeightedGraph, PathQuery) {
        let g = WeightedGraph::unit(n, (0..n - 1).map(|i| (i, i + 1))).unwrap();
        let q = PathQuery::new(&g, vec![0, 1]).unwrap();
        (g, q)
    }

    #[test]
    fn nearest_rank_distinct_scores() {
        let (_, q) = query_on_line(100);
        let scores = NodeScore::new((0..100).map(|i| i as f64 / 100.0).collect()).unwrap();
        let keep = select_nodes(&scores, 95.0, &q);
        let expected: BTreeSet<usize> = [0, 1, 95, 96, 97, 98, 99].into_iter().collect();
        assert_eq!(keep, expected);
    }

    #[test]
    fn percentile_zero_keeps_everything() {
        let (_, q) = query_on_line(10);
        let scores = NodeScore::new((0..10).map(|i| i as f64 / 10.0).collect()).unwrap();
        assert_eq!(select_nodes(&scores, 0.0, &q).len(), 10);
    }

    #[test]
    fn ties_are_all_kept() {
        let (_, q) = query_on_line(10);
        let scores = NodeScore::new(vec![0.3; 10]).unwrap();
        for p in [5.0, 50.0, 95.0] {
            assert_eq!(select_nodes(&scores, p, &q).len(), 10);
        }
    }

    #[test]
    fn schedule_ends_at_zero() {
        let cfg = GraspConfig::default();
        let s = cfg.schedule();
        assert_eq!(s.len(), 11);
        assert_eq!(s[0], 95.0);
        assert!((s[9] - 5.0).abs() < 1e-9);
        assert_eq!(s[10], 0.0);
        let exact = GraspConfig {
            start_percentile: 100.0,
            ..Default::default()
        };
        assert_eq!(exact.schedule().len(), 11);
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = GraspConfig {
            decrement: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = GraspConfig {
            start_percentile: 120.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn already_valid_needs_no_call() {
        let (g, q) = query_on_line(5);
        let out = grasp_attack(&g, &q, &GraspConfig::default(), &Scorer::Detour).unwrap();
        assert!(out.result.valid);
        assert!(out.result.cut_edges.is_empty());
        assert_eq!(out.result.pathattack_calls, 0);
    }

    #[test]
    fn widens_until_competitor_is_visible() {
        // p* = 0-1-2-3 (length 3); competitor 0-4-3 (length 2) runs through a
        // node the scores rank last
        let g = WeightedGraph::unit(5, [(0, 1), (1, 2), (2, 3), (0, 4), (4, 3)]).unwrap();
        let q = PathQuery::new(&g, vec![0, 1, 2, 3]).unwrap();
        let scores = NodeScore::new(vec![1.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        let out = grasp_with_scores(&g, &q, &GraspConfig::default(), &scores).unwrap();
        assert!(out.result.valid);
        assert_eq!(out.result.total_cost, 1.0);
        assert!(out.trace.iterations.len() > 1);
        let first = &out.trace.iterations[0];
        assert_eq!(first.subgraph_nodes, 4);
        let deleted: EdgeMask = out.result.cut_edges.iter().copied().collect();
        let p = crate::paths::shortest_path(&g, &deleted, &q).unwrap();
        assert_eq!(p, Path::new(&g, vec![0, 1, 2, 3]).unwrap());
    }
}
