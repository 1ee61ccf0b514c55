//! Seeded synthetic graph families and instance sampling. All generated
//! edges have unit weight and unit cost.

use std::collections::{BTreeSet, HashSet};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeMask, PathQuery, WeightedGraph};
use crate::paths::k_shortest_paths;

pub const SAMPLE_TRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lattice,
    Er,
    Ba,
    Ws,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lattice" => Ok(Family::Lattice),
            "er" => Ok(Family::Er),
            "ba" => Ok(Family::Ba),
            "ws" => Ok(Family::Ws),
            _ => Err(Error::Config(format!("unknown graph family `{s}`"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Lattice => "lattice",
            Family::Er => "er",
            Family::Ba => "ba",
            Family::Ws => "ws",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GeneratorParams {
    Lattice { rows: usize, cols: usize },
    Er { n: usize, p: f64 },
    Ba { n: usize, m: usize },
    Ws { n: usize, k: usize, p_rewire: f64 },
}

impl GeneratorParams {
    pub fn family(&self) -> Family {
        match self {
            GeneratorParams::Lattice { .. } => Family::Lattice,
            GeneratorParams::Er { .. } => Family::Er,
            GeneratorParams::Ba { .. } => Family::Ba,
            GeneratorParams::Ws { .. } => Family::Ws,
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            GeneratorParams::Lattice { rows, cols } => rows * cols,
            GeneratorParams::Er { n, .. } | GeneratorParams::Ba { n, .. } | GeneratorParams::Ws { n, .. } => n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::validation(msg));
        match *self {
            GeneratorParams::Lattice { rows, cols } if rows == 0 || cols == 0 => {
                bad(format!("lattice {rows}x{cols} is empty"))
            }
            GeneratorParams::Er { p, .. } if !(0.0..=1.0).contains(&p) => {
                bad(format!("edge probability {p} outside [0, 1]"))
            }
            GeneratorParams::Ba { n, m } if m == 0 || m >= n => {
                bad(format!("attachment count m={m} must satisfy 1 <= m < n={n}"))
            }
            GeneratorParams::Ws { n, k, p_rewire } => {
                if k < 2 || k >= n {
                    bad(format!("ring degree k={k} must satisfy 2 <= k < n={n}"))
                } else if !(0.0..=1.0).contains(&p_rewire) {
                    bad(format!("rewire probability {p_rewire} outside [0, 1]"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Whether the parameters fall in the benchmark's published ranges:
    /// ER `p ∈ [0.01, 0.017]`, BA `m ∈ [5, 9]`, WS `k ∈ [11, 15]` with
    /// `p_r = 0.02`.
    pub fn in_benchmark_ranges(&self) -> bool {
        match *self {
            GeneratorParams::Lattice { .. } => true,
            GeneratorParams::Er { p, .. } => (0.01..=0.017).contains(&p),
            GeneratorParams::Ba { m, .. } => (5..=9).contains(&m),
            GeneratorParams::Ws { k, p_rewire, .. } => (11..=15).contains(&k) && (p_rewire - 0.02).abs() < 1e-12,
        }
    }
}

pub fn generate(params: &GeneratorParams, seed: u64) -> Result<WeightedGraph> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.node_count();
    let pairs: Vec<(usize, usize)> = match *params {
        GeneratorParams::Lattice { rows, cols } => lattice(rows, cols),
        GeneratorParams::Er { n, p } => erdos_renyi(n, p, &mut rng),
        GeneratorParams::Ba { n, m } => barabasi_albert(n, m, &mut rng),
        GeneratorParams::Ws { n, k, p_rewire } => watts_strogatz(n, k, p_rewire, &mut rng),
    };
    WeightedGraph::unit(n, pairs)
}

fn lattice(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                out.push((v, v + 1));
            }
            if r + 1 < rows {
                out.push((v, v + cols));
            }
        }
    }
    out
}

fn erdos_renyi(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                out.push((u, v));
            }
        }
    }
    out
}

/// Preferential attachment seeded with a star on `m + 1` nodes; each new
/// node links to `m` distinct targets drawn in proportion to degree.
fn barabasi_albert(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (1..=m).map(|v| (0, v)).collect();
    let mut repeated: Vec<usize> = Vec::with_capacity(2 * n * m);
    repeated.extend(std::iter::repeat_n(0, m));
    repeated.extend(1..=m);
    for source in m + 1..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            targets.insert(*repeated.choose(rng).expect("non-empty"));
        }
        for &t in &targets {
            out.push((t, source));
        }
        repeated.extend(targets.iter().copied());
        repeated.extend(std::iter::repeat_n(source, m));
    }
    out
}

/// Ring lattice with `⌊k/2⌋` neighbors per side, each edge rewired to a
/// uniform endpoint with probability `p_rewire`. Rewiring keeps the edge count.
fn watts_strogatz(n: usize, k: usize, p_rewire: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    let mut degree = vec![0usize; n];
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if edges.insert(key(u, v)) {
                degree[u] += 1;
                degree[v] += 1;
            }
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            if rng.gen::<f64>() >= p_rewire {
                continue;
            }
            let v = (u + j) % n;
            if !edges.contains(&key(u, v)) || degree[u] >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.gen_range(0..n);
                if w != u && !edges.contains(&key(u, w)) {
                    break w;
                }
            };
            edges.remove(&key(u, v));
            degree[v] -= 1;
            edges.insert(key(u, w));
            degree[w] += 1;
        }
    }
    let mut out: Vec<(usize, usize)> = edges.into_iter().collect();
    out.sort_unstable();
    out
}

/// Picks distinct `s, t` uniformly from the largest component and sets p*
/// to the `k_star`-th shortest simple path between them, resampling up to
/// [`SAMPLE_TRIES`] times when fewer than `k_star` paths exist.
pub fn sample_instance(g: &WeightedGraph, k_star: usize, seed: u64) -> Result<PathQuery> {
    if k_star == 0 {
        return Err(Error::Config("k_star must be at least 1".into()));
    }
    let comps = g.components();
    let Some(largest) = comps.first().filter(|c| c.len() >= 2) else {
        return Err(Error::Sampling("no component with two or more nodes".into()));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SAMPLE_TRIES {
        let s = *largest.choose(&mut rng).expect("non-empty");
        let t = loop {
            let t = *largest.choose(&mut rng).expect("non-empty");
            if t != s {
                break t;
            }
        };
        let paths = k_shortest_paths(g, &EdgeMask::new(), s, t, k_star);
        if paths.len() == k_star {
            let p_star = paths.into_iter().next_back().expect("k_star >= 1");
            return PathQuery::new(g, p_star.nodes);
        }
    }
    Err(Error::Sampling(format!(
        "no pair with at least {k_star} simple paths after {SAMPLE_TRIES} tries"
    )))
}
