//! Per-node relevance scores in `[0, 1]` used to pick subproblems.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{assemble, FeatureConfig, FeatureFamily};
use crate::gat::ModelWeights;
use crate::graph::{EdgeMask, PathQuery, WeightedGraph, LENGTH_EPS};
use crate::paths::dijkstra;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeScore {
    pub scores: Vec<f64>,
}

impl NodeScore {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some(v) = scores.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
            return Err(Error::validation(format!("score {v} outside [0, 1]")));
        }
        Ok(NodeScore { scores })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// `exp(−margin / mean edge weight)` where `margin = d(s,v) + d(v,t) − |p*|`;
/// non-positive margins and p* nodes score 1, nodes off every s–t route 0.
pub fn detour_margin_scores(g: &WeightedGraph, mask: &EdgeMask, query: &PathQuery) -> NodeScore {
    let from_s = dijkstra(g, mask, query.source);
    let to_t = dijkstra(g, mask, query.target);
    let scale = g.mean_weight();
    let target_len = query.target_path.length;
    let mut scores: Vec<f64> = (0..g.node_count())
        .map(|v| {
            let through = from_s.dist[v] + to_t.dist[v];
            if !through.is_finite() {
                return 0.0;
            }
            let margin = through - target_len;
            if margin <= LENGTH_EPS * target_len.max(1.0) {
                1.0
            } else {
                (-margin / scale).exp()
            }
        })
        .collect();
    for &v in &query.target_path.nodes {
        scores[v] = 1.0;
    }
    NodeScore { scores }
}

pub fn constant_scores(g: &WeightedGraph) -> NodeScore {
    NodeScore {
        scores: vec![1.0; g.node_count()],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Gat,
    #[default]
    Detour,
    Constant,
}

impl FromStr for ScorerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gat" => Ok(ScorerKind::Gat),
            "detour" => Ok(ScorerKind::Detour),
            "constant" => Ok(ScorerKind::Constant),
            _ => Err(Error::Config(format!("unknown scorer `{s}`"))),
        }
    }
}

impl std::fmt::Display for ScorerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScorerKind::Gat => "gat",
            ScorerKind::Detour => "detour",
            ScorerKind::Constant => "constant",
        })
    }
}

/// Everything needed to score nodes of one instance.
#[derive(Debug, Clone, Copy)]
pub enum Scorer<'a> {
    Gat {
        weights: &'a ModelWeights,
        families: &'a [FeatureFamily],
        config: FeatureConfig,
    },
    Detour,
    Constant,
}

impl Scorer<'_> {
    pub fn kind(&self) -> ScorerKind {
        match self {
            Scorer::Gat { .. } => ScorerKind::Gat,
            Scorer::Detour => ScorerKind::Detour,
            Scorer::Constant => ScorerKind::Constant,
        }
    }

    pub fn score(&self, g: &WeightedGraph, query: &PathQuery) -> Result<NodeScore> {
        match self {
            Scorer::Gat {
                weights,
                families,
                config,
            } => {
                let features = assemble(g, query, families, config)?;
                weights.forward(g, &features)
            }
            Scorer::Detour => Ok(detour_margin_scores(g, &EdgeMask::new(), query)),
            Scorer::Constant => Ok(constant_scores(g)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_cycle_competitor_scores_one() {
        let g = WeightedGraph::unit(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let q = PathQuery::new(&g, vec![0, 3, 2]).unwrap();
        let s = detour_margin_scores(&g, &EdgeMask::new(), &q);
        assert_eq!(s.scores, vec![1.0; 4]);
    }

    #[test]
    fn unreachable_scores_zero_and_detours_decay() {
        // 0-1-2 is p*, 3 hangs off 1 (margin 2), 4 is isolated
        let g = WeightedGraph::unit(5, [(0, 1), (1, 2), (1, 3)]).unwrap();
        let q = PathQuery::new(&g, vec![0, 1, 2]).unwrap();
        let s = detour_margin_scores(&g, &EdgeMask::new(), &q);
        assert_eq!(&s.scores[..3], &[1.0, 1.0, 1.0]);
        assert!((s.scores[3] - (-2.0f64).exp()).abs() < 1e-12);
        assert_eq!(s.scores[4], 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(NodeScore::new(vec![0.5, 1.5]).is_err());
        assert!(NodeScore::new(vec![f64::NAN]).is_err());
    }
}
