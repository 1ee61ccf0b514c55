//! Experiment driver: runs solver variants over seeded suites, writes one
//! CSV row per (instance, method), and turns those rows into summary
//! tables and SVG charts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{baseline_greedy, is_attack_valid, pathattack, AttackOptions, AttackResult, CoverBackend};
use crate::error::{Error, Result};
use crate::features::{parse_families, FeatureConfig, FeatureFamily};
use crate::gat::ModelWeights;
use crate::graph::{load_edge_list, EdgeMask, PathQuery, WeightedGraph};
use crate::grasp::{grasp_attack, GraspConfig};
use crate::scoring::{Scorer, ScorerKind};
use crate::synthgen::{generate, sample_instance, GeneratorParams};

/// Graphs with fewer edges than this trigger [`small_graph_advisory`].
pub const SMALL_GRAPH_EDGES: usize = 1000;

/// One CSV record. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance_id: String,
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub method: String,
    pub scorer: String,
    pub features: String,
    pub cover_backend: String,
    pub seed: u64,
    pub edges_cut: usize,
    pub total_cost: f64,
    pub valid: bool,
    pub wall_time_ms: f64,
    pub feature_time_ms: f64,
    pub subproblem_edges: usize,
    pub reduction_pct: f64,
    pub pathattack_calls: usize,
    pub final_threshold: Option<f64>,
}

impl BenchRow {
    /// Variant label used to group rows, e.g. `grasp/detour/greedy`.
    pub fn variant(&self) -> String {
        match self.method.as_str() {
            "grasp" if self.features != "none" => {
                format!("grasp/{}[{}]/{}", self.scorer, self.features, self.cover_backend)
            }
            "grasp" => format!("grasp/{}/{}", self.scorer, self.cover_backend),
            "pathattack" => format!("pathattack/{}", self.cover_backend),
            other => other.to_string(),
        }
    }

    pub fn total_time_ms(&self) -> f64 {
        self.wall_time_ms + self.feature_time_ms
    }
}

/// Why a row was written with `valid = false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    pub instance_id: String,
    pub method: String,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Baseline,
    Pathattack,
    Grasp,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Baseline => "baseline",
            Method::Pathattack => "pathattack",
            Method::Grasp => "grasp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub method: Method,
    #[serde(default)]
    pub cover: CoverBackend,
    #[serde(default)]
    pub scorer: ScorerKind,
    /// Feature families for the gat scorer, e.g. `"structural,ppr"` or `"all"`.
    #[serde(default)]
    pub features: Option<String>,
}

/// A real graph read from an edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub name: String,
    pub path: PathBuf,
}

fn default_k_star() -> usize {
    100
}

fn default_instances() -> usize {
    15
}

fn default_start() -> f64 {
    95.0
}

fn default_decrement() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub seed: u64,
    /// Instances per generator entry and per graph file.
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_k_star")]
    pub k_star: usize,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_start")]
    pub start_percentile: f64,
    #[serde(default = "default_decrement")]
    pub decrement: f64,
    /// Weight file for the gat scorer, relative to the config file.
    #[serde(default)]
    pub weights: Option<PathBuf>,
    #[serde(default)]
    pub generators: Vec<GeneratorParams>,
    #[serde(default)]
    pub files: Vec<GraphFile>,
    pub methods: Vec<MethodSpec>,
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SuiteConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a suite file; relative weight and graph paths are resolved
    /// against its directory.
    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(FsPath::new("."));
        if let Some(w) = cfg.weights.as_mut() {
            if w.is_relative() {
                *w = base.join(&*w);
            }
        }
        for f in &mut cfg.files {
            if f.path.is_relative() {
                f.path = base.join(&f.path);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("suite lists no methods".into()));
        }
        if self.k_star == 0 {
            return Err(Error::Config("k_star must be at least 1".into()));
        }
        self.grasp_config(CoverBackend::Greedy).validate()?;
        for g in &self.generators {
            g.validate()?;
        }
        for m in &self.methods {
            if m.method == Method::Grasp && m.scorer == ScorerKind::Gat && self.weights.is_none() {
                return Err(Error::Config("gat scorer needs a `weights` file".into()));
            }
            if let Some(f) = &m.features {
                parse_families(f)?;
            }
        }
        Ok(())
    }

    fn grasp_config(&self, cover: CoverBackend) -> GraspConfig {
        GraspConfig {
            start_percentile: self.start_percentile,
            decrement: self.decrement,
            cover,
            strict: self.strict,
            seed: self.seed,
        }
    }
}

/// Rows plus the error sidecar of a suite run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteOutput {
    pub rows: Vec<BenchRow>,
    pub errors: Vec<RowError>,
}

impl SuiteOutput {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        write_rows(&self.rows, out)
    }

    pub fn write_errors(&self, mut out: impl Write) -> Result<()> {
        for e in &self.errors {
            serde_json::to_writer(&mut out, e)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn write_rows(rows: &[BenchRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const CSV_HEADER: [&str; 18] = [
    "instance_id",
    "family",
    "n",
    "m",
    "method",
    "scorer",
    "features",
    "cover_backend",
    "seed",
    "edges_cut",
    "total_cost",
    "valid",
    "wall_time_ms",
    "feature_time_ms",
    "subproblem_edges",
    "reduction_pct",
    "pathattack_calls",
    "final_threshold",
];

pub fn read_rows(input: impl std::io::Read) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

/// Printed when a graph is small enough that plain constraint generation
/// may beat the subgraph loop.
pub fn small_graph_advisory(m: usize) -> Option<String> {
    (m < SMALL_GRAPH_EDGES).then(|| {
        format!(
            "note: graph has {m} edges (< {SMALL_GRAPH_EDGES}); on small graphs plain pathattack \
             is often faster than grasp"
        )
    })
}

struct Instance {
    id: String,
    family: String,
    seed: u64,
    graph: std::sync::Arc<WeightedGraph>,
    query: Result<PathQuery>,
}

/// Seed for the `i`-th instance of the `j`-th graph source.
fn instance_seed(base: u64, j: usize, i: usize) -> u64 {
    base.wrapping_mul(1_000_003)
        .wrapping_add((j as u64) << 32)
        .wrapping_add(i as u64)
}

fn build_instances(cfg: &SuiteConfig) -> Result<Vec<Instance>> {
    let mut jobs: Vec<(String, String, u64, Option<std::sync::Arc<WeightedGraph>>, Option<GeneratorParams>)> =
        Vec::new();
    for (j, params) in cfg.generators.iter().enumerate() {
        for i in 0..cfg.instances {
            let seed = instance_seed(cfg.seed, j, i);
            let family = params.family().to_string();
            jobs.push((format!("{family}-{j}-{i}"), family, seed, None, Some(*params)));
        }
    }
    for (f, file) in cfg.files.iter().enumerate() {
        let g = std::sync::Arc::new(load_edge_list(&file.path)?);
        let j = cfg.generators.len() + f;
        for i in 0..cfg.instances {
            let seed = instance_seed(cfg.seed, j, i);
            jobs.push((format!("{}-{i}", file.name), file.name.clone(), seed, Some(g.clone()), None));
        }
    }
    jobs.into_par_iter()
        .map(|(id, family, seed, graph, params)| {
            let graph = match (graph, params) {
                (Some(g), _) => g,
                (None, Some(p)) => std::sync::Arc::new(generate(&p, seed)?),
                (None, None) => unreachable!("every job has a graph source"),
            };
            let query = sample_instance(&graph, cfg.k_star, seed);
            Ok(Instance {
                id,
                family,
                seed,
                graph,
                query,
            })
        })
        .collect()
}

struct Loaded {
    weights: Option<ModelWeights>,
}

fn method_features(spec: &MethodSpec, weights: Option<&ModelWeights>) -> Result<Option<Vec<FeatureFamily>>> {
    if spec.method != Method::Grasp || spec.scorer != ScorerKind::Gat {
        return Ok(None);
    }
    if let Some(f) = &spec.features {
        return parse_families(f).map(Some);
    }
    let fam = weights.map(|w| w.metadata.feature_families.join(",")).unwrap_or_default();
    if fam.is_empty() {
        Ok(Some(parse_families("all")?))
    } else {
        parse_families(&fam).map(Some)
    }
}

fn features_label(families: &Option<Vec<FeatureFamily>>) -> String {
    match families {
        None => "none".into(),
        Some(f) => f.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("+"),
    }
}

/// Independent re-check: p* is the full-graph answer after the cut and no
/// p* edge was cut.
fn recheck(g: &WeightedGraph, q: &PathQuery, strict: bool, r: &AttackResult) -> Result<()> {
    let protected = q.protected_edges(g);
    if r.cut_edges.iter().any(|e| protected.contains(e)) {
        return Err(Error::validation("cut contains a p* edge"));
    }
    let mask: EdgeMask = r.cut_edges.iter().copied().collect();
    if !is_attack_valid(g, &mask, q, strict) {
        return Err(Error::validation("p* is not the shortest path after the cut"));
    }
    Ok(())
}

fn run_one(
    inst: &Instance,
    spec: &MethodSpec,
    cfg: &SuiteConfig,
    loaded: &Loaded,
) -> (BenchRow, Option<RowError>) {
    let g = &*inst.graph;
    let m = g.edge_count();
    let families = method_features(spec, loaded.weights.as_ref());
    let mut row = BenchRow {
        instance_id: inst.id.clone(),
        family: inst.family.clone(),
        n: g.node_count(),
        m,
        method: spec.method.to_string(),
        scorer: if spec.method == Method::Grasp {
            spec.scorer.to_string()
        } else {
            "none".into()
        },
        features: families.as_ref().map(features_label).unwrap_or_else(|_| "none".into()),
        cover_backend: if spec.method == Method::Baseline {
            "none".into()
        } else {
            spec.cover.to_string()
        },
        seed: inst.seed,
        edges_cut: 0,
        total_cost: 0.0,
        valid: false,
        wall_time_ms: 0.0,
        feature_time_ms: 0.0,
        subproblem_edges: m,
        reduction_pct: 0.0,
        pathattack_calls: 0,
        final_threshold: None,
    };
    let fail = |row: BenchRow, e: Error| {
        let err = RowError {
            instance_id: row.instance_id.clone(),
            method: row.variant(),
            error: e.to_string(),
        };
        (row, Some(err))
    };
    let q = match &inst.query {
        Ok(q) => q,
        Err(e) => return fail(row, Error::Sampling(e.to_string())),
    };
    let families = match families {
        Ok(f) => f,
        Err(e) => return fail(row, e),
    };
    let opts = AttackOptions {
        cover: spec.cover,
        strict: cfg.strict,
        seed: inst.seed,
        budget: None,
    };
    let outcome = match spec.method {
        Method::Baseline => baseline_greedy(g, &EdgeMask::new(), q, cfg.strict).map(|r| (r, 0.0, None)),
        Method::Pathattack => pathattack(g, &EdgeMask::new(), q, &opts).map(|r| (r, 0.0, None)),
        Method::Grasp => {
            let mut gc = cfg.grasp_config(spec.cover);
            gc.seed = inst.seed;
            let fams = families.unwrap_or_default();
            let scorer = match spec.scorer {
                ScorerKind::Gat => Scorer::Gat {
                    weights: loaded.weights.as_ref().expect("validated"),
                    families: &fams,
                    config: FeatureConfig::default(),
                },
                ScorerKind::Detour => Scorer::Detour,
                ScorerKind::Constant => Scorer::Constant,
            };
            grasp_attack(g, q, &gc, &scorer).map(|o| (o.result, o.score_time_ms, Some(o.final_threshold)))
        }
    };
    let (result, feature_time, threshold) = match outcome {
        Ok(x) => x,
        Err(e) => return fail(row, e),
    };
    row.edges_cut = result.edges_cut();
    row.total_cost = result.total_cost;
    row.wall_time_ms = result.wall_time_ms;
    row.feature_time_ms = feature_time;
    row.subproblem_edges = result.subproblem_edges;
    row.reduction_pct = if m == 0 {
        0.0
    } else {
        (100.0 * (1.0 - result.subproblem_edges as f64 / m as f64)).clamp(0.0, 100.0)
    };
    row.pathattack_calls = result.pathattack_calls;
    row.final_threshold = threshold;
    if !result.valid {
        return fail(row, Error::validation("solver reported an invalid attack"));
    }
    match recheck(g, q, cfg.strict, &result) {
        Ok(()) => {
            row.valid = true;
            (row, None)
        }
        Err(e) => fail(row, e),
    }
}

/// Runs every method on every instance. `threads = 0` uses all cores.
///
/// Rows come back in (instance, method) order regardless of scheduling.
pub fn run_suite(cfg: &SuiteConfig, threads: usize) -> Result<SuiteOutput> {
    cfg.validate()?;
    let weights = match &cfg.weights {
        Some(p) if cfg.methods.iter().any(|m| m.scorer == ScorerKind::Gat && m.method == Method::Grasp) => {
            Some(ModelWeights::load(p)?)
        }
        _ => None,
    };
    let loaded = Loaded { weights };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        let instances = build_instances(cfg)?;
        let results: Vec<Vec<(BenchRow, Option<RowError>)>> = instances
            .par_iter()
            .map(|inst| cfg.methods.iter().map(|m| run_one(inst, m, cfg, &loaded)).collect())
            .collect();
        let mut out = SuiteOutput::default();
        for (row, err) in results.into_iter().flatten() {
            if let Some(e) = err {
                log::warn!("{} {}: {}", e.instance_id, e.method, e.error);
                out.errors.push(e);
            }
            out.rows.push(row);
        }
        Ok(out)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_m")]
    pub m: usize,
    pub sizes: Vec<usize>,
    #[serde(default = "default_scaling_instances")]
    pub instances: usize,
    #[serde(default = "default_k_star")]
    pub k_star: usize,
    #[serde(default)]
    pub weights: Option<PathBuf>,
    pub methods: Vec<MethodSpec>,
}

fn default_m() -> usize {
    7
}

fn default_scaling_instances() -> usize {
    3
}

impl ScalingConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScalingConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.to_suite().validate()?;
        Ok(cfg)
    }

    /// Reads a scaling file; a relative weight path is resolved against its directory.
    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml(&fs::read_to_string(path)?)?;
        if let Some(w) = cfg.weights.as_mut() {
            if w.is_relative() {
                *w = path.parent().unwrap_or(FsPath::new(".")).join(&*w);
            }
        }
        Ok(cfg)
    }

    /// The equivalent suite: one BA generator per size, one fixed weight file.
    pub fn to_suite(&self) -> SuiteConfig {
        SuiteConfig {
            seed: self.seed,
            instances: self.instances,
            k_star: self.k_star,
            strict: false,
            start_percentile: default_start(),
            decrement: default_decrement(),
            weights: self.weights.clone(),
            generators: self
                .sizes
                .iter()
                .map(|&n| GeneratorParams::Ba { n, m: self.m })
                .collect(),
            files: Vec::new(),
            methods: self.methods.clone(),
        }
    }
}

/// Sweeps BA graph size with a fixed attachment count.
pub fn scaling_run(cfg: &ScalingConfig, threads: usize) -> Result<SuiteOutput> {
    if cfg.sizes.is_empty() {
        return Err(Error::Config("no sizes given".into()));
    }
    run_suite(&cfg.to_suite(), threads)
}

/// Median, quartiles (linear interpolation between order statistics) and mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub mean: f64,
}

pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q1 = quantile(&v, 0.25);
        let q3 = quantile(&v, 0.75);
        Some(Stats {
            count: v.len(),
            median: quantile(&v, 0.5),
            q1,
            q3,
            iqr: q3 - q1,
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}

pub const METRICS: [&str; 5] = [
    "reduction_pct",
    "edges_cut",
    "total_cost",
    "wall_time_ms",
    "total_time_ms",
];

fn metric(row: &BenchRow, name: &str) -> f64 {
    match name {
        "reduction_pct" => row.reduction_pct,
        "edges_cut" => row.edges_cut as f64,
        "total_cost" => row.total_cost,
        "wall_time_ms" => row.wall_time_ms,
        "total_time_ms" => row.total_time_ms(),
        _ => unreachable!("unknown metric {name}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub family: String,
    pub variant: String,
    pub metric: String,
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub mean: f64,
}

/// Per (family, variant, metric) statistics over valid rows, in
/// first-appearance order of families and variants.
pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: BTreeMap<(String, String), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.valid) {
        let key = (r.family.clone(), r.variant());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    let mut out = Vec::new();
    for key in order {
        let members = &groups[&key];
        for name in METRICS {
            let vals: Vec<f64> = members.iter().map(|r| metric(r, name)).collect();
            let s = Stats::of(&vals).expect("group is non-empty");
            out.push(SummaryRow {
                family: key.0.clone(),
                variant: key.1.clone(),
                metric: name.to_string(),
                count: s.count,
                median: s.median,
                q1: s.q1,
                q3: s.q3,
                iqr: s.iqr,
                mean: s.mean,
            });
        }
    }
    out
}

pub fn write_summary(summary: &[SummaryRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in summary {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [&str; 8] = [
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Grouped bar chart: one group per family, one bar per variant, whiskers
/// spanning the interquartile range.
fn bar_chart(title: &str, families: &[String], variants: &[String], cell: &dyn Fn(&str, &str) -> Option<Stats>) -> String {
    let (w, h) = (720.0, 420.0);
    let (left, right, top, bottom) = (60.0, 180.0, 40.0, 50.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let mut ymax: f64 = 0.0;
    for f in families {
        for v in variants {
            if let Some(s) = cell(f, v) {
                ymax = ymax.max(s.q3).max(s.median);
            }
        }
    }
    if ymax <= 0.0 {
        ymax = 1.0;
    }
    ymax *= 1.1;
    let y = |val: f64| top + plot_h * (1.0 - val / ymax);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, left + plot_w / 2.0, escape(title));
    let _ = writeln!(s, r##"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="#333"/>"##, top + plot_h);
    let _ = writeln!(s, r##"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="#333"/>"##, top + plot_h, left + plot_w, top + plot_h);
    for i in 0..=4 {
        let val = ymax * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y(val) + 4.0,
            fmt_tick(val)
        );
    }
    let group_w = plot_w / families.len().max(1) as f64;
    let bar_w = (group_w * 0.8) / variants.len().max(1) as f64;
    for (fi, f) in families.iter().enumerate() {
        let gx = left + fi as f64 * group_w + group_w * 0.1;
        for (vi, v) in variants.iter().enumerate() {
            let Some(st) = cell(f, v) else { continue };
            let x = gx + vi as f64 * bar_w;
            let color = PALETTE[vi % PALETTE.len()];
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{color}"><title>{}: {}</title></rect>"#,
                y(st.median),
                bar_w * 0.9,
                (top + plot_h - y(st.median)).max(0.0),
                escape(v),
                fmt_tick(st.median)
            );
            let cx = x + bar_w * 0.45;
            let _ = writeln!(
                s,
                r##"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="#222"/>"##,
                y(st.q1),
                y(st.q3)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            gx + group_w * 0.4,
            top + plot_h + 18.0,
            escape(f)
        );
    }
    for (vi, v) in variants.iter().enumerate() {
        let ly = top + 14.0 + vi as f64 * 18.0;
        let lx = left + plot_w + 14.0;
        let _ = writeln!(s, r#"<rect x="{lx}" y="{}" width="12" height="12" fill="{}"/>"#, ly - 10.0, PALETTE[vi % PALETTE.len()]);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 18.0, escape(v));
    }
    s.push_str("</svg>\n");
    s
}

/// Line chart of a metric's median against graph size, one line per variant.
fn line_chart(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let (w, h) = (720.0, 420.0);
    let (left, right, top, bottom) = (60.0, 180.0, 40.0, 50.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let xs = series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0));
    let xmin = xs.clone().fold(f64::INFINITY, f64::min);
    let xmax = xs.fold(f64::NEG_INFINITY, f64::max);
    let ymax = series
        .iter()
        .flat_map(|(_, p)| p.iter().map(|q| q.1))
        .fold(0.0f64, f64::max)
        .max(1e-12)
        * 1.1;
    let span = if xmax > xmin { xmax - xmin } else { 1.0 };
    let px = |x: f64| left + plot_w * (x - xmin) / span;
    let py = |y: f64| top + plot_h * (1.0 - y / ymax);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, left + plot_w / 2.0, escape(title));
    let _ = writeln!(s, r##"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="#333"/>"##, top + plot_h);
    let _ = writeln!(s, r##"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="#333"/>"##, top + plot_h, left + plot_w, top + plot_h);
    for i in 0..=4 {
        let val = ymax * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, py(val) + 4.0, fmt_tick(val));
    }
    let mut ticks: Vec<f64> = series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)).collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for t in ticks {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, px(t), top + plot_h + 18.0, fmt_tick(t));
    }
    for (vi, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[vi % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, coords.join(" "));
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, px(x), py(y));
        }
        let ly = top + 14.0 + vi as f64 * 18.0;
        let lx = left + plot_w + 14.0;
        let _ = writeln!(s, r#"<rect x="{lx}" y="{}" width="12" height="12" fill="{color}"/>"#, ly - 10.0);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 18.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 0.1 && v.abs() < 1e5) {
        format!("{}", (v * 100.0).round() / 100.0)
    } else {
        format!("{v:.2e}")
    }
}

const SYNTHETIC: [&str; 4] = ["lattice", "er", "ba", "ws"];

const PANELS: [(&str, &str); 3] = [
    ("reduction_pct", "Reduction in problem size (%)"),
    ("edges_cut", "Edges removed"),
    ("total_time_ms", "Run time incl. scoring (ms)"),
];

/// Writes bar charts (synthetic and real families separately, three
/// metrics each) and, when a family was run at several sizes, scaling
/// curves. Returns the files written; no rows means no files.
pub fn write_plots(rows: &[BenchRow], dir: impl AsRef<FsPath>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let valid: Vec<&BenchRow> = rows.iter().filter(|r| r.valid).collect();
    let mut written = Vec::new();
    if valid.is_empty() {
        return Ok(written);
    }
    fs::create_dir_all(dir)?;
    let mut families: Vec<String> = Vec::new();
    let mut variants: Vec<String> = Vec::new();
    for r in &valid {
        if !families.contains(&r.family) {
            families.push(r.family.clone());
        }
        let v = r.variant();
        if !variants.contains(&v) {
            variants.push(v);
        }
    }
    let (synthetic, real): (Vec<String>, Vec<String>) =
        families.into_iter().partition(|f| SYNTHETIC.contains(&f.as_str()));
    for (tag, fams) in [("synthetic", synthetic), ("real", real)] {
        if fams.is_empty() {
            continue;
        }
        for (metric_name, title) in PANELS {
            let cell = |f: &str, v: &str| {
                let vals: Vec<f64> = valid
                    .iter()
                    .filter(|r| r.family == f && r.variant() == v)
                    .map(|r| metric(r, metric_name))
                    .collect();
                Stats::of(&vals)
            };
            let svg = bar_chart(title, &fams, &variants, &cell);
            let path = dir.join(format!("{tag}_{metric_name}.svg"));
            fs::write(&path, svg)?;
            written.push(path);
        }
    }
    let mut sizes: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for r in &valid {
        let e = sizes.entry(r.family.as_str()).or_default();
        if !e.contains(&r.n) {
            e.push(r.n);
        }
    }
    for (family, ns) in sizes {
        if ns.len() < 2 {
            continue;
        }
        for (metric_name, title) in [("wall_time_ms", "Run time (ms)"), ("reduction_pct", "Reduction in problem size (%)")] {
            let series: Vec<(String, Vec<(f64, f64)>)> = variants
                .iter()
                .map(|v| {
                    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
                    for r in valid.iter().filter(|r| r.family == family && &r.variant() == v) {
                        by_n.entry(r.n).or_default().push(metric(r, metric_name));
                    }
                    let pts = by_n
                        .into_iter()
                        .map(|(n, vals)| (n as f64, Stats::of(&vals).expect("non-empty").median))
                        .collect();
                    (v.clone(), pts)
                })
                .filter(|(_, p): &(String, Vec<(f64, f64)>)| !p.is_empty())
                .collect();
            let svg = line_chart(&format!("{title} vs n ({family})"), &series);
            let path = dir.join(format!("scaling_{family}_{metric_name}.svg"));
            fs::write(&path, svg)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_suite() -> SuiteConfig {
        SuiteConfig::from_toml(
            r#"
            seed = 3
            instances = 2
            k_star = 5
            [[generators]]
            family = "lattice"
            rows = 6
            cols = 6
            [[methods]]
            method = "pathattack"
            [[methods]]
            method = "grasp"
            scorer = "constant"
            "#,
        )
        .unwrap()
    }

    #[test]
    fn two_instances_two_methods_four_rows() {
        let out = run_suite(&tiny_suite(), 2).unwrap();
        assert_eq!(out.rows.len(), 4);
        assert!(out.errors.is_empty());
        assert!(out.rows.iter().all(|r| r.valid));
        assert_eq!(out.rows[0].method, "pathattack");
        assert_eq!(out.rows[1].method, "grasp");
        assert_eq!(out.rows[0].edges_cut, out.rows[1].edges_cut);
    }

    #[test]
    fn csv_header_is_exact() {
        let mut buf = Vec::new();
        write_rows(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER.join(","));
        let out = run_suite(&tiny_suite(), 1).unwrap();
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(read_rows(text.as_bytes()).unwrap(), out.rows);
    }

    #[test]
    fn sampling_failure_becomes_invalid_row() {
        let mut cfg = tiny_suite();
        cfg.k_star = 1_000_000;
        cfg.generators = vec![GeneratorParams::Lattice { rows: 2, cols: 2 }];
        let out = run_suite(&cfg, 1).unwrap();
        assert_eq!(out.rows.len(), 4);
        assert!(out.rows.iter().all(|r| !r.valid));
        assert_eq!(out.errors.len(), 4);
    }

    #[test]
    fn gat_without_weights_is_config_error() {
        let text = "[[methods]]\nmethod = \"grasp\"\nscorer = \"gat\"\n";
        assert!(matches!(SuiteConfig::from_toml(text), Err(Error::Config(_))));
    }

    #[test]
    fn quantiles_interpolate() {
        let s = Stats::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.q3, 3.25);
        assert_eq!(s.mean, 2.5);
        assert!(Stats::of(&[]).is_none());
    }

    #[test]
    fn advisory_only_for_small_graphs() {
        assert!(small_graph_advisory(999).is_some());
        assert!(small_graph_advisory(1000).is_none());
    }
}
