use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use grasp_core::attack::{baseline_greedy, is_attack_valid, pathattack_with_system, AttackOptions, CoverBackend};
use grasp_core::bench::{
    read_rows, run_suite, scaling_run, small_graph_advisory, summarize, write_plots, write_rows, write_summary,
    BenchRow, Method, MethodSpec, ScalingConfig, SuiteConfig, SuiteOutput,
};
use grasp_core::features::{assemble, parse_families, FeatureConfig, FeatureFamily};
use grasp_core::gat::ModelWeights;
use grasp_core::graph::{load_edge_list, write_edge_list, EdgeMask, InstanceFile, PathQuery, WeightedGraph};
use grasp_core::grasp::{grasp_attack, GraspConfig};
use grasp_core::scoring::{Scorer, ScorerKind};
use grasp_core::synthgen::{generate, sample_instance, GeneratorParams};

#[derive(Parser)]
#[command(name = "grasp", version, about = "Force Path Cut attacks, accelerated by node scoring")]
struct Cli {
    /// Random seed. For `bench` and `scaling` it overrides the file's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for suites; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a graph (or read one) and sample a path instance.
    Gen(GenArgs),
    /// Write the node feature matrix of an instance as CSV.
    Features(FeatureArgs),
    /// Run one attack on one instance.
    Attack(AttackArgs),
    /// Run a suite described by a TOML file.
    Bench(BenchArgs),
    /// Sweep Barabási–Albert graph size.
    Scaling(ScalingArgs),
    /// Summaries and plots from a results CSV.
    Summarize(SummarizeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Lattice,
    Er,
    Ba,
    Ws,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, required_unless_present = "graph")]
    family: Option<FamilyArg>,
    /// Sample from an existing edge list instead of generating.
    #[arg(long, conflicts_with = "family")]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.014)]
    p: f64,
    #[arg(long, default_value_t = 7)]
    m: usize,
    #[arg(long, default_value_t = 13)]
    k: usize,
    #[arg(long, default_value_t = 0.02)]
    p_rewire: f64,
    #[arg(long, default_value_t = 30)]
    rows: usize,
    #[arg(long, default_value_t = 30)]
    cols: usize,
    #[arg(long, default_value_t = 100)]
    k_star: usize,
    /// Output file stem.
    #[arg(long, default_value = "instance")]
    name: String,
}

#[derive(Args)]
struct FeatureArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Comma-separated families (structural, flow, ppr) or `all`.
    #[arg(long, default_value = "all")]
    families: String,
    /// Skip z-score normalization.
    #[arg(long)]
    raw: bool,
    #[arg(long, default_value_t = 0.15)]
    restart: f64,
    /// Katz attenuation as a fraction of 1/lambda_max.
    #[arg(long, default_value_t = 0.9)]
    katz_scale: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    Pathattack,
    Baseline,
    Grasp,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverArg {
    Greedy,
    Lp,
}

impl From<CoverArg> for CoverBackend {
    fn from(c: CoverArg) -> Self {
        match c {
            CoverArg::Greedy => CoverBackend::Greedy,
            CoverArg::Lp => CoverBackend::Lp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScorerArg {
    Gat,
    Detour,
    Constant,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "pathattack")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "greedy")]
    cover: CoverArg,
    #[arg(long, value_enum, default_value = "detour")]
    scorer: ScorerArg,
    /// Weight file for `--scorer gat`.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Feature families for `--scorer gat`; defaults to the weight file's.
    #[arg(long)]
    features: Option<String>,
    #[arg(long, default_value_t = 95.0)]
    start_pct: f64,
    #[arg(long, default_value_t = 10.0)]
    decrement: f64,
    /// Also cut competitors as long as p*.
    #[arg(long)]
    strict_unique: bool,
    /// Result CSV (one row).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the final covering LP (pathattack only).
    #[arg(long)]
    dump_lp: Option<PathBuf>,
    /// Write the grasp iteration trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite TOML file.
    suite: PathBuf,
    /// Skip summary and plots.
    #[arg(long)]
    no_plots: bool,
}

#[derive(Args)]
struct ScalingArgs {
    /// Scaling TOML file; flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 7)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    instances: usize,
    #[arg(long, default_value_t = 100)]
    k_star: usize,
    /// Adds a gat-scored grasp variant.
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    results: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    fs::create_dir_all(&cli.out_dir).with_context(|| format!("creating {}", cli.out_dir.display()))?;
    match &cli.cmd {
        Cmd::Gen(a) => gen(&cli, a),
        Cmd::Features(a) => features(&cli, a),
        Cmd::Attack(a) => attack(&cli, a),
        Cmd::Bench(a) => bench(&cli, a),
        Cmd::Scaling(a) => scaling(&cli, a),
        Cmd::Summarize(a) => summarize_cmd(&cli, a),
    }
}

fn advise(g: &WeightedGraph) {
    if let Some(msg) = small_graph_advisory(g.edge_count()) {
        eprintln!("{msg}");
    }
}

fn gen(cli: &Cli, a: &GenArgs) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let g = match (&a.graph, a.family) {
        (Some(path), _) => load_edge_list(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(f)) => {
            let params = match f {
                FamilyArg::Lattice => GeneratorParams::Lattice { rows: a.rows, cols: a.cols },
                FamilyArg::Er => GeneratorParams::Er { n: a.n, p: a.p },
                FamilyArg::Ba => GeneratorParams::Ba { n: a.n, m: a.m },
                FamilyArg::Ws => GeneratorParams::Ws { n: a.n, k: a.k, p_rewire: a.p_rewire },
            };
            if !params.in_benchmark_ranges() {
                log::warn!("parameters are outside the benchmark ranges");
            }
            generate(&params, seed)?
        }
        (None, None) => bail!("give --family or --graph"),
    };
    let q = sample_instance(&g, a.k_star, seed)?;
    let tsv = cli.out_dir.join(format!("{}.tsv", a.name));
    let json = cli.out_dir.join(format!("{}.json", a.name));
    write_edge_list(&g, &tsv)?;
    InstanceFile {
        graph: PathBuf::from(format!("{}.tsv", a.name)),
        source: q.source,
        target: q.target,
        p_star: q.target_path.nodes.clone(),
    }
    .write(&json)?;
    let n = g.node_count() as f64;
    println!(
        "n={} m={} mean degree {:.2} (n log n / n = {:.2}); s={} t={} |p*|={} length {}",
        g.node_count(),
        g.edge_count(),
        2.0 * g.edge_count() as f64 / n,
        n.ln(),
        q.source,
        q.target,
        q.target_path.edge_count(),
        q.target_path.length
    );
    println!("wrote {} and {}", tsv.display(), json.display());
    Ok(())
}

fn load_instance(path: &Path) -> Result<(WeightedGraph, PathQuery)> {
    InstanceFile::load(path).with_context(|| format!("loading instance {}", path.display()))
}

fn features(cli: &Cli, a: &FeatureArgs) -> Result<()> {
    let (g, q) = load_instance(&a.instance)?;
    let families = parse_families(&a.families)?;
    let cfg = FeatureConfig {
        restart: a.restart,
        katz_scale: a.katz_scale,
        normalize: !a.raw,
        ..FeatureConfig::default()
    };
    let x = assemble(&g, &q, &families, &cfg)?;
    let out = a.out.clone().unwrap_or_else(|| cli.out_dir.join("features.csv"));
    x.write_csv(BufWriter::new(File::create(&out)?))?;
    println!("{} x {} features -> {}", x.rows, x.cols, out.display());
    Ok(())
}

fn gat_families(a: &AttackArgs, w: &ModelWeights) -> Result<Vec<FeatureFamily>> {
    let spec = match &a.features {
        Some(f) => f.clone(),
        None if w.metadata.feature_families.is_empty() => "all".into(),
        None => w.metadata.feature_families.join(","),
    };
    Ok(parse_families(&spec)?)
}

fn attack(cli: &Cli, a: &AttackArgs) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let (g, q) = load_instance(&a.instance)?;
    advise(&g);
    let m = g.edge_count();
    let opts = AttackOptions {
        cover: a.cover.into(),
        strict: a.strict_unique,
        seed,
        budget: None,
    };
    if a.dump_lp.is_some() && a.method != MethodArg::Pathattack {
        log::warn!("--dump-lp only applies to --method pathattack; ignored");
    }
    if a.trace.is_some() && a.method != MethodArg::Grasp {
        log::warn!("--trace only applies to --method grasp; ignored");
    }
    let mut row = BenchRow {
        instance_id: a.instance.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        family: "instance".into(),
        n: g.node_count(),
        m,
        method: String::new(),
        scorer: "none".into(),
        features: "none".into(),
        cover_backend: CoverBackend::from(a.cover).to_string(),
        seed,
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
    let result = match a.method {
        MethodArg::Pathattack => {
            row.method = "pathattack".into();
            let (r, cs) = pathattack_with_system(&g, &EdgeMask::new(), &q, &opts)?;
            if let Some(path) = &a.dump_lp {
                let mut f = BufWriter::new(File::create(path)?);
                cs.write_lp(&mut f)?;
                f.flush()?;
            }
            r
        }
        MethodArg::Baseline => {
            row.method = "baseline".into();
            row.cover_backend = "none".into();
            baseline_greedy(&g, &EdgeMask::new(), &q, a.strict_unique)?
        }
        MethodArg::Grasp => {
            row.method = "grasp".into();
            let cfg = GraspConfig {
                start_percentile: a.start_pct,
                decrement: a.decrement,
                cover: a.cover.into(),
                strict: a.strict_unique,
                seed,
            };
            let weights;
            let families;
            let scorer = match a.scorer {
                ScorerArg::Detour => Scorer::Detour,
                ScorerArg::Constant => Scorer::Constant,
                ScorerArg::Gat => {
                    let Some(path) = &a.weights else { bail!("--scorer gat needs --weights") };
                    weights = ModelWeights::load(path).with_context(|| format!("loading {}", path.display()))?;
                    families = gat_families(a, &weights)?;
                    row.features = families.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("+");
                    Scorer::Gat {
                        weights: &weights,
                        families: &families,
                        config: FeatureConfig::default(),
                    }
                }
            };
            row.scorer = scorer.kind().to_string();
            let out = grasp_attack(&g, &q, &cfg, &scorer)?;
            if let Some(path) = &a.trace {
                let mut f = BufWriter::new(File::create(path)?);
                out.trace.write_jsonl(&mut f)?;
                f.flush()?;
            }
            row.feature_time_ms = out.score_time_ms;
            row.final_threshold = Some(out.final_threshold);
            out.result
        }
    };
    let mask: EdgeMask = result.cut_edges.iter().copied().collect();
    let protected = q.protected_edges(&g);
    row.valid = result.valid
        && !result.cut_edges.iter().any(|e| protected.contains(e))
        && is_attack_valid(&g, &mask, &q, a.strict_unique);
    row.edges_cut = result.edges_cut();
    row.total_cost = result.total_cost;
    row.wall_time_ms = result.wall_time_ms;
    row.subproblem_edges = result.subproblem_edges;
    row.reduction_pct = if m == 0 {
        0.0
    } else {
        (100.0 * (1.0 - result.subproblem_edges as f64 / m as f64)).clamp(0.0, 100.0)
    };
    row.pathattack_calls = result.pathattack_calls;
    println!(
        "{}: cut {} edges, cost {}, valid {}, {:.2} ms (+{:.2} ms scoring), subproblem {} of {} edges",
        row.variant(),
        row.edges_cut,
        row.total_cost,
        row.valid,
        row.wall_time_ms,
        row.feature_time_ms,
        row.subproblem_edges,
        m
    );
    println!("cut edges: {:?}", result.cut_edges);
    let out = a.out.clone().unwrap_or_else(|| cli.out_dir.join("results.csv"));
    write_rows(std::slice::from_ref(&row), BufWriter::new(File::create(&out)?))?;
    if !row.valid {
        bail!("attack failed the validity re-check");
    }
    Ok(())
}

fn write_outputs(cli: &Cli, out: &SuiteOutput, plots: bool) -> Result<()> {
    let csv = cli.out_dir.join("results.csv");
    out.write_csv(BufWriter::new(File::create(&csv)?))?;
    println!("{} rows -> {}", out.rows.len(), csv.display());
    if !out.errors.is_empty() {
        let path = cli.out_dir.join("errors.jsonl");
        out.write_errors(BufWriter::new(File::create(&path)?))?;
        eprintln!("{} rows failed; see {}", out.errors.len(), path.display());
    }
    if plots {
        report(cli, &out.rows)?;
    }
    Ok(())
}

fn report(cli: &Cli, rows: &[BenchRow]) -> Result<()> {
    let summary = summarize(rows);
    let path = cli.out_dir.join("summary.csv");
    write_summary(&summary, BufWriter::new(File::create(&path)?))?;
    let plots = write_plots(rows, cli.out_dir.join("plots"))?;
    for s in summary.iter().filter(|s| s.metric == "edges_cut" || s.metric == "total_time_ms") {
        println!(
            "{:<10} {:<32} {:<14} median {:>10.2}  iqr {:>9.2}  mean {:>10.2}  (n={})",
            s.family, s.variant, s.metric, s.median, s.iqr, s.mean, s.count
        );
    }
    println!("summary -> {}, {} plots", path.display(), plots.len());
    Ok(())
}

fn bench(cli: &Cli, a: &BenchArgs) -> Result<()> {
    let mut cfg = SuiteConfig::load(&a.suite).with_context(|| format!("loading {}", a.suite.display()))?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = run_suite(&cfg, cli.threads)?;
    if let Some(small) = out.rows.iter().map(|r| r.m).min() {
        if let Some(msg) = small_graph_advisory(small) {
            eprintln!("{msg}");
        }
    }
    write_outputs(cli, &out, !a.no_plots)
}

fn scaling(cli: &Cli, a: &ScalingArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => ScalingConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => {
            let mut methods = vec![spec(Method::Pathattack, ScorerKind::Detour), spec(Method::Grasp, ScorerKind::Detour)];
            if a.weights.is_some() {
                methods.push(spec(Method::Grasp, ScorerKind::Gat));
            }
            ScalingConfig {
                seed: 0,
                m: a.m,
                sizes: a.sizes.clone(),
                instances: a.instances,
                k_star: a.k_star,
                weights: a.weights.clone(),
                methods,
            }
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = scaling_run(&cfg, cli.threads)?;
    write_outputs(cli, &out, true)
}

fn spec(method: Method, scorer: ScorerKind) -> MethodSpec {
    MethodSpec {
        method,
        cover: CoverBackend::Greedy,
        scorer,
        features: None,
    }
}

fn summarize_cmd(cli: &Cli, a: &SummarizeArgs) -> Result<()> {
    let rows = read_rows(File::open(&a.results).with_context(|| format!("opening {}", a.results.display()))?)?;
    if rows.is_empty() {
        println!("no rows");
    }
    report(cli, &rows)
}
