//! Force Path Cut solvers: constraint generation over a weighted set cover
//! (PATHATTACK) and the greedy cheapest-edge baseline.

use std::str::FromStr;
use web_time::Instant;

use serde::{Deserialize, Serialize};

use crate::cover::{greedy_set_cover, lp_cover_round, ConstraintSystem};
use crate::error::{Error, Result};
use crate::graph::{is_path_valid, EdgeMask, PathQuery, WeightedGraph};
use crate::paths::{approx_eq, k_shortest_paths, shortest_path};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverBackend {
    #[default]
    Greedy,
    Lp,
}

impl FromStr for CoverBackend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(CoverBackend::Greedy),
            "lp" => Ok(CoverBackend::Lp),
            _ => Err(Error::Config(format!("unknown cover backend `{s}`"))),
        }
    }
}

impl std::fmt::Display for CoverBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CoverBackend::Greedy => "greedy",
            CoverBackend::Lp => "lp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttackOptions {
    pub cover: CoverBackend,
    /// Also cut competitors whose length equals p*'s.
    pub strict: bool,
    pub seed: u64,
    pub budget: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackResult {
    /// Ascending full-graph edge indices.
    pub cut_edges: Vec<usize>,
    pub total_cost: f64,
    pub valid: bool,
    pub pathattack_calls: usize,
    pub constraints_generated: usize,
    pub wall_time_ms: f64,
    pub subproblem_nodes: usize,
    pub subproblem_edges: usize,
}

impl AttackResult {
    pub fn edges_cut(&self) -> usize {
        self.cut_edges.len()
    }
}

/// The shortest-path condition every solver must establish: p* is the
/// deterministic shortest path (and, in strict mode, the only one of its length).
pub fn is_attack_valid(
    g: &WeightedGraph,
    mask: &EdgeMask,
    query: &PathQuery,
    strict: bool,
) -> bool {
    competitor(g, mask, query, strict).is_none()
}

/// A path that currently prevents p* from being the answer.
fn competitor(
    g: &WeightedGraph,
    mask: &EdgeMask,
    query: &PathQuery,
    strict: bool,
) -> Option<Vec<usize>> {
    let p = shortest_path(g, mask, query)?;
    if p.nodes != query.target_path.nodes {
        return Some(p.nodes);
    }
    if strict {
        let two = k_shortest_paths(g, mask, query.source, query.target, 2);
        if let Some(second) = two.get(1) {
            if second.length < query.target_path.length
                || approx_eq(second.length, query.target_path.length)
            {
                return Some(second.nodes.clone());
            }
        }
    }
    None
}

fn check_preconditions(g: &WeightedGraph, mask: &EdgeMask, query: &PathQuery) -> Result<Vec<usize>> {
    if !is_path_valid(g, mask, &query.target_path)? {
        return Err(Error::validation("p* is not a path of the masked graph"));
    }
    Ok(query.protected_edges(g))
}

fn solve_cover(cs: &ConstraintSystem, opts: &AttackOptions, round: usize) -> Result<Vec<usize>> {
    match opts.cover {
        CoverBackend::Greedy => greedy_set_cover(cs),
        CoverBackend::Lp => Ok(lp_cover_round(cs, opts.seed.wrapping_add(round as u64))?.edges),
    }
}

/// Restores cut edges, most expensive first, whenever p* stays valid without them.
pub(crate) fn prune_cut(
    g: &WeightedGraph,
    mask: &EdgeMask,
    query: &PathQuery,
    strict: bool,
    cut: Vec<usize>,
) -> Vec<usize> {
    let mut order = cut.clone();
    order.sort_by(|&a, &b| g.edge(b).cost.total_cmp(&g.edge(a).cost).then(b.cmp(&a)));
    let mut kept: EdgeMask = cut.into_iter().collect();
    for e in order {
        kept.remove(e);
        if !is_attack_valid(g, &mask.union(&kept), query, strict) {
            kept.insert(e);
        }
    }
    kept.iter().collect()
}

/// Constraint generation: find the current winning competitor, add it as a
/// covering row, re-solve the cover from scratch, repeat until p* wins.
/// Returns the result together with the final constraint system.
pub fn pathattack_with_system(
    g: &WeightedGraph,
    mask: &EdgeMask,
    query: &PathQuery,
    opts: &AttackOptions,
) -> Result<(AttackResult, ConstraintSystem)> {
    let start = Instant::now();
    let protected = check_preconditions(g, mask, query)?;
    let mut cs = ConstraintSystem::new(g, &protected);
    cs.budget = opts.budget;
    let mut cut: Vec<usize> = Vec::new();
    loop {
        let current = mask.union(&cut.iter().copied().collect());
        match competitor(g, &current, query, opts.strict) {
            None => break,
            Some(path) => {
                cs.add_path(g, &path)?;
                cut = solve_cover(&cs, opts, cs.len())?;
            }
        }
    }
    let cut = prune_cut(g, mask, query, opts.strict, cut);
    let total_cost = cut.iter().map(|&e| g.edge(e).cost).sum();
    let result = AttackResult {
        cut_edges: cut,
        total_cost,
        valid: true,
        pathattack_calls: 1,
        constraints_generated: cs.len(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        subproblem_nodes: g.node_count(),
        subproblem_edges: g.edge_count() - mask.iter().filter(|&e| e < g.edge_count()).count(),
    };
    Ok((result, cs))
}

pub fn pathattack(
    g: &WeightedGraph,
    mask: &EdgeMask,
    query: &PathQuery,
    opts: &AttackOptions,
) -> Result<AttackResult> {
    pathattack_with_system(g, mask, query, opts).map(|(r, _)| r)
}

/// Repeatedly removes the cheapest non-p* edge (ties to the smaller index)
/// of the current winning competitor.
pub fn baseline_greedy(
    g: &WeightedGraph,
    mask: &EdgeMask,
    query: &PathQuery,
    strict: bool,
) -> Result<AttackResult> {
    let start = Instant::now();
    let protected = check_preconditions(g, mask, query)?;
    let mut current = mask.clone();
    let mut cut = Vec::new();
    let mut rounds = 0;
    while let Some(path) = competitor(g, &current, query, strict) {
        rounds += 1;
        let victim = path
            .windows(2)
            .map(|w| g.edge_between(w[0], w[1]).expect("hop is an edge"))
            .filter(|e| !protected.contains(e))
            .min_by(|&a, &b| g.edge(a).cost.total_cmp(&g.edge(b).cost).then(a.cmp(&b)))
            .ok_or_else(|| Error::Infeasible {
                reason: "competing path consists solely of p* edges".into(),
                path: Some(path.clone()),
            })?;
        current.insert(victim);
        cut.push(victim);
    }
    cut.sort_unstable();
    let total_cost = cut.iter().map(|&e| g.edge(e).cost).sum();
    Ok(AttackResult {
        cut_edges: cut,
        total_cost,
        valid: true,
        pathattack_calls: 0,
        constraints_generated: rounds,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        subproblem_nodes: g.node_count(),
        subproblem_edges: g.edge_count() - mask.iter().filter(|&e| e < g.edge_count()).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> (WeightedGraph, PathQuery) {
        let g = WeightedGraph::unit(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let q = PathQuery::new(&g, vec![0, 3, 2]).unwrap();
        (g, q)
    }

    #[test]
    fn already_shortest_needs_no_cut() {
        let g = WeightedGraph::unit(3, [(0, 1), (1, 2)]).unwrap();
        let q = PathQuery::new(&g, vec![0, 1, 2]).unwrap();
        let r = pathattack(&g, &EdgeMask::new(), &q, &AttackOptions::default()).unwrap();
        assert!(r.valid);
        assert!(r.cut_edges.is_empty());
        assert_eq!(r.constraints_generated, 0);
        let b = baseline_greedy(&g, &EdgeMask::new(), &q, false).unwrap();
        assert!(b.cut_edges.is_empty());
    }

    #[test]
    fn four_cycle_cuts_one_edge() {
        let (g, q) = square();
        for cover in [CoverBackend::Greedy, CoverBackend::Lp] {
            let opts = AttackOptions {
                cover,
                ..Default::default()
            };
            let r = pathattack(&g, &EdgeMask::new(), &q, &opts).unwrap();
            assert_eq!(r.total_cost, 1.0);
            assert_eq!(r.constraints_generated, 1);
            let cut = g.edge(r.cut_edges[0]);
            assert!(cut.u == 1 || cut.v == 1);
        }
        let b = baseline_greedy(&g, &EdgeMask::new(), &q, false).unwrap();
        assert_eq!(b.total_cost, 1.0);
    }

    #[test]
    fn strict_mode_cuts_lex_larger_ties() {
        // p* = [0,1,2] already wins the tie, strict mode still cuts [0,3,2]
        let g = WeightedGraph::unit(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let q = PathQuery::new(&g, vec![0, 1, 2]).unwrap();
        let lax = pathattack(&g, &EdgeMask::new(), &q, &AttackOptions::default()).unwrap();
        assert!(lax.cut_edges.is_empty());
        let opts = AttackOptions {
            strict: true,
            ..Default::default()
        };
        let strict = pathattack(&g, &EdgeMask::new(), &q, &opts).unwrap();
        assert_eq!(strict.cut_edges.len(), 1);
        assert!(is_attack_valid(
            &g,
            &strict.cut_edges.iter().copied().collect(),
            &q,
            true
        ));
    }

    #[test]
    fn masked_p_star_is_rejected() {
        let (g, q) = square();
        let mask: EdgeMask = [g.edge_between(0, 3).unwrap()].into_iter().collect();
        assert!(pathattack(&g, &mask, &q, &AttackOptions::default()).is_err());
    }

    #[test]
    fn budget_too_small_is_infeasible() {
        let (g, q) = square();
        let opts = AttackOptions {
            budget: Some(0.5),
            ..Default::default()
        };
        assert!(matches!(
            pathattack(&g, &EdgeMask::new(), &q, &opts),
            Err(Error::Infeasible { .. })
        ));
    }
}
