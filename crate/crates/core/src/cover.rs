//! Weighted set cover over competing-path constraints.
//!
//! Each constraint is the set of non-protected edges of one competing path;
//! an edge set "covers" it by containing at least one of those edges.

use std::collections::BTreeSet;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::lp;

#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    /// Removal cost per graph edge.
    costs: Vec<f64>,
    /// Edges of p*; never variables, never in a constraint.
    protected: Vec<bool>,
    constraints: Vec<Vec<usize>>,
    paths: Vec<Vec<usize>>,
    pub budget: Option<f64>,
}

impl ConstraintSystem {
    pub fn new(g: &WeightedGraph, protected_edges: &[usize]) -> Self {
        let mut protected = vec![false; g.edge_count()];
        for &e in protected_edges {
            protected[e] = true;
        }
        ConstraintSystem {
            costs: g.edges().iter().map(|e| e.cost).collect(),
            protected,
            constraints: Vec::new(),
            paths: Vec::new(),
            budget: None,
        }
    }

    /// Builds a system directly from edge-index sets (no graph, no protected edges).
    pub fn from_sets(costs: Vec<f64>, sets: Vec<Vec<usize>>) -> Result<Self> {
        let mut cs = ConstraintSystem {
            protected: vec![false; costs.len()],
            costs,
            constraints: Vec::new(),
            paths: Vec::new(),
            budget: None,
        };
        for s in sets {
            cs.push_constraint(s, Vec::new())?;
        }
        Ok(cs)
    }

    fn push_constraint(&mut self, mut set: Vec<usize>, path: Vec<usize>) -> Result<()> {
        set.retain(|&e| !self.protected[e]);
        set.sort_unstable();
        set.dedup();
        if set.is_empty() {
            return Err(Error::Infeasible {
                reason: "competing path uses only protected edges".into(),
                path: Some(path),
            });
        }
        if let Some(&e) = set.iter().find(|&&e| e >= self.costs.len()) {
            return Err(Error::validation(format!("edge index {e} out of range")));
        }
        self.constraints.push(set);
        self.paths.push(path);
        Ok(())
    }

    /// Adds the constraint "cut at least one non-p* edge of this path".
    pub fn add_path(&mut self, g: &WeightedGraph, nodes: &[usize]) -> Result<()> {
        let edges = nodes
            .windows(2)
            .map(|w| {
                g.edge_between(w[0], w[1])
                    .ok_or_else(|| Error::validation(format!("({}, {}) is not an edge", w[0], w[1])))
            })
            .collect::<Result<Vec<_>>>()?;
        self.push_constraint(edges, nodes.to_vec())
    }

    pub fn constraints(&self) -> &[Vec<usize>] {
        &self.constraints
    }

    /// Node sequences of the constraint paths (empty for set-built systems).
    pub fn paths(&self) -> &[Vec<usize>] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn cost(&self, e: usize) -> f64 {
        self.costs[e]
    }

    pub fn total_cost(&self, edges: &[usize]) -> f64 {
        edges.iter().map(|&e| self.costs[e]).sum()
    }

    /// Edge indices that are decision variables.
    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.costs.len()).filter(move |&e| !self.protected[e])
    }

    pub fn variable_count(&self) -> usize {
        self.protected.iter().filter(|&&p| !p).count()
    }

    /// Rows × columns of the full linear system: two bound rows per
    /// variable, one covering row per path, plus the budget row when set.
    pub fn matrix_shape(&self) -> (usize, usize) {
        let vars = self.variable_count();
        (
            2 * vars + self.len() + usize::from(self.budget.is_some()),
            vars,
        )
    }

    pub fn is_covered_by(&self, edges: &[usize]) -> bool {
        let chosen: BTreeSet<usize> = edges.iter().copied().collect();
        self.constraints
            .iter()
            .all(|c| c.iter().any(|e| chosen.contains(e)))
    }

    fn check_budget(&self, cost: f64) -> Result<()> {
        match self.budget {
            Some(b) if cost > b + 1e-9 => Err(Error::infeasible(format!(
                "cover cost {cost} exceeds budget {b}"
            ))),
            _ => Ok(()),
        }
    }

    /// Writes the covering LP in CPLEX LP text format.
    pub fn write_lp(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "\\ Force Path Cut covering LP")?;
        writeln!(
            out,
            "\\ rows={} cols={} paths={}",
            self.matrix_shape().0,
            self.matrix_shape().1,
            self.len()
        )?;
        writeln!(out, "Minimize")?;
        let terms: Vec<String> = self
            .variables()
            .map(|e| format!("{} x{e}", self.costs[e]))
            .collect();
        writeln!(out, " obj: {}", join_terms(&terms))?;
        writeln!(out, "Subject To")?;
        for (i, c) in self.constraints.iter().enumerate() {
            let terms: Vec<String> = c.iter().map(|e| format!("x{e}")).collect();
            writeln!(out, " p{i}: {} >= 1", join_terms(&terms))?;
        }
        if let Some(b) = self.budget {
            let terms: Vec<String> = self
                .variables()
                .map(|e| format!("{} x{e}", self.costs[e]))
                .collect();
            writeln!(out, " budget: {} <= {b}", join_terms(&terms))?;
        }
        writeln!(out, "Bounds")?;
        for e in self.variables() {
            writeln!(out, " 0 <= x{e} <= 1")?;
        }
        writeln!(out, "End")
    }
}

fn join_terms(terms: &[String]) -> String {
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

/// Greedy weighted set cover: repeatedly take the edge covering the most
/// still-uncovered constraints per unit cost (ties to the smaller index).
/// Returns ascending edge indices.
pub fn greedy_set_cover(cs: &ConstraintSystem) -> Result<Vec<usize>> {
    let chosen = greedy_over(cs, &(0..cs.len()).collect::<Vec<_>>())?;
    cs.check_budget(cs.total_cost(&chosen))?;
    Ok(chosen)
}

fn greedy_over(cs: &ConstraintSystem, rows: &[usize]) -> Result<Vec<usize>> {
    let n_edges = cs.costs.len();
    // edge -> rows containing it
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_edges];
    for &r in rows {
        if cs.constraints[r].is_empty() {
            return Err(Error::infeasible("empty constraint cannot be covered"));
        }
        for &e in &cs.constraints[r] {
            members[e].push(r);
        }
    }
    let mut covered = vec![false; cs.constraints.len()];
    let mut gain: Vec<usize> = members.iter().map(Vec::len).collect();
    let mut remaining = rows.len();
    let mut chosen = Vec::new();
    while remaining > 0 {
        let mut best: Option<(usize, f64)> = None;
        for (e, &gn) in gain.iter().enumerate() {
            if gn == 0 {
                continue;
            }
            let ratio = gn as f64 / cs.costs[e];
            if best.is_none_or(|(_, r)| ratio > r) {
                best = Some((e, ratio));
            }
        }
        let (e, _) = best.ok_or_else(|| Error::infeasible("constraint left uncovered"))?;
        chosen.push(e);
        for &r in &members[e] {
            if !covered[r] {
                covered[r] = true;
                remaining -= 1;
                for &f in &cs.constraints[r] {
                    gain[f] -= 1;
                }
            }
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Fractional optimum of the covering LP, indexed by graph edge.
#[derive(Debug, Clone)]
pub struct LpCover {
    pub objective: f64,
    pub x: Vec<f64>,
}

/// Solves `min Σ c_e x_e  s.t.  Σ_{e∈p} x_e ≥ 1 ∀p, 0 ≤ x ≤ 1`.
///
/// With positive costs the upper bounds never bind, so the bounded problem
/// equals the one with `x ≥ 0` only. That problem is solved through its
/// packing dual, whose slack basis is immediately feasible.
pub fn solve_cover_lp(cs: &ConstraintSystem) -> Result<LpCover> {
    let mut x = vec![0.0; cs.costs.len()];
    if cs.is_empty() {
        return Ok(LpCover { objective: 0.0, x });
    }
    // only edges that appear in some constraint can be non-zero
    let relevant: Vec<usize> = cs
        .constraints
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut row_of = vec![usize::MAX; cs.costs.len()];
    for (i, &e) in relevant.iter().enumerate() {
        row_of[e] = i;
    }
    // dual: max Σ y_p  s.t. Σ_{p∋e} y_p ≤ c_e
    let mut a = vec![vec![0.0; cs.len()]; relevant.len()];
    for (p, c) in cs.constraints.iter().enumerate() {
        for &e in c {
            a[row_of[e]][p] = 1.0;
        }
    }
    let b: Vec<f64> = relevant.iter().map(|&e| cs.costs[e]).collect();
    let profit = vec![1.0; cs.len()];
    let sol = lp::maximize_packing(&a, &b, &profit)?;
    for (i, &e) in relevant.iter().enumerate() {
        x[e] = sol.row_duals[i].clamp(0.0, 1.0);
    }
    Ok(LpCover {
        objective: sol.objective,
        x,
    })
}

#[derive(Debug, Clone)]
pub struct RoundedCover {
    pub edges: Vec<usize>,
    pub lp_objective: f64,
    /// Trial on which rounding first covered everything, if any did.
    pub successful_trial: Option<usize>,
    /// `true` when the greedy cover was cheaper and returned instead.
    pub used_greedy: bool,
}

pub const ROUNDING_TRIALS: usize = 100;

/// LP relaxation followed by randomized rounding.
///
/// Each edge is kept with probability `min(1, x_e · ln(2|P|))`, for up to
/// [`ROUNDING_TRIALS`] trials until one covers every constraint. Anything
/// still uncovered is repaired greedily, redundant edges are then dropped in
/// decreasing-cost order, and the result is compared with the greedy cover;
/// the cheaper of the two is returned.
pub fn lp_cover_round(cs: &ConstraintSystem, seed: u64) -> Result<RoundedCover> {
    let lp = solve_cover_lp(cs)?;
    cs.check_budget(lp.objective)?;
    if cs.is_empty() {
        return Ok(RoundedCover {
            edges: Vec::new(),
            lp_objective: 0.0,
            successful_trial: None,
            used_greedy: false,
        });
    }
    let inflation = (2.0 * cs.len() as f64).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support: Vec<usize> = (0..lp.x.len()).filter(|&e| lp.x[e] > 0.0).collect();
    let mut picked: Vec<usize> = Vec::new();
    let mut successful_trial = None;
    for trial in 0..ROUNDING_TRIALS {
        picked = support
            .iter()
            .copied()
            .filter(|&e| rng.gen::<f64>() < (lp.x[e] * inflation).min(1.0))
            .collect();
        if cs.is_covered_by(&picked) {
            successful_trial = Some(trial);
            break;
        }
    }
    if successful_trial.is_none() {
        let chosen: BTreeSet<usize> = picked.iter().copied().collect();
        let uncovered: Vec<usize> = (0..cs.len())
            .filter(|&r| !cs.constraints[r].iter().any(|e| chosen.contains(e)))
            .collect();
        picked.extend(greedy_over(cs, &uncovered)?);
    }
    let rounded = prune_cover(cs, picked);
    let greedy = greedy_over(cs, &(0..cs.len()).collect::<Vec<_>>())?;
    let (edges, used_greedy) = if cs.total_cost(&greedy) < cs.total_cost(&rounded) - 1e-12 {
        (greedy, true)
    } else {
        (rounded, false)
    };
    cs.check_budget(cs.total_cost(&edges))?;
    Ok(RoundedCover {
        edges,
        lp_objective: lp.objective,
        successful_trial,
        used_greedy,
    })
}

/// Drops edges, most expensive first, whose removal leaves every
/// constraint covered.
fn prune_cover(cs: &ConstraintSystem, edges: Vec<usize>) -> Vec<usize> {
    let mut set: BTreeSet<usize> = edges.into_iter().collect();
    let mut order: Vec<usize> = set.iter().copied().collect();
    order.sort_by(|&a, &b| cs.costs[b].total_cmp(&cs.costs[a]).then(a.cmp(&b)));
    let mut hits = vec![0usize; cs.len()];
    for (r, c) in cs.constraints.iter().enumerate() {
        hits[r] = c.iter().filter(|e| set.contains(e)).count();
    }
    for e in order {
        let removable = cs
            .constraints
            .iter()
            .enumerate()
            .all(|(r, c)| hits[r] > 1 || !c.contains(&e));
        if removable {
            set.remove(&e);
            for (r, c) in cs.constraints.iter().enumerate() {
                if c.contains(&e) {
                    hits[r] -= 1;
                }
            }
        }
    }
    set.into_iter().collect()
}
