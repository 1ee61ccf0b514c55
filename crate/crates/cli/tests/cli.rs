use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "instance_id,family,n,m,method,scorer,features,cover_backend,seed,edges_cut,total_cost,valid,\
wall_time_ms,feature_time_ms,subproblem_edges,reduction_pct,pathattack_calls,final_threshold";

fn grasp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grasp"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: Output) -> (String, String) {
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(out.status.success(), "stdout:\n{stdout}\nstderr:\n{stderr}");
    (stdout, stderr)
}

fn gen_ba(dir: &Path) {
    ok(grasp(dir, &["--seed", "4", "gen", "--family", "ba", "--n", "250", "--m", "5", "--k-star", "25"]));
}

#[test]
fn gen_then_pathattack_writes_row_and_lp() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_ba(d);
    let inst: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("instance.json")).unwrap()).unwrap();
    assert_eq!(inst["graph"], "instance.tsv");
    assert!(inst["p_star"].as_array().unwrap().len() >= 2);

    let lp = d.join("cover.lp");
    ok(grasp(
        d,
        &["attack", "--instance", d.join("instance.json").to_str().unwrap(), "--cover", "lp", "--dump-lp", lp.to_str().unwrap()],
    ));
    let csv = fs::read_to_string(d.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), HEADER);
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 18);
    assert_eq!((row[4], row[7], row[11]), ("pathattack", "lp", "true"));
    let lp = fs::read_to_string(lp).unwrap();
    for section in ["Minimize", "Subject To", "Bounds", "End"] {
        assert!(lp.contains(section), "missing {section}");
    }
}

#[test]
fn grasp_attack_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_ba(d);
    let trace = d.join("trace.jsonl");
    let (stdout, _) = ok(grasp(
        d,
        &[
            "attack",
            "--instance",
            d.join("instance.json").to_str().unwrap(),
            "--method",
            "grasp",
            "--scorer",
            "detour",
            "--start-pct",
            "90",
            "--decrement",
            "30",
            "--trace",
            trace.to_str().unwrap(),
            "--out",
            d.join("g.csv").to_str().unwrap(),
        ],
    ));
    assert!(stdout.contains("grasp/detour/greedy"));
    let records: Vec<serde_json::Value> = fs::read_to_string(trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!records.is_empty());
    assert_eq!(records[0]["threshold"], 90.0);
    assert_eq!(records.last().unwrap()["valid"], true);
    assert!(fs::read_to_string(d.join("g.csv")).unwrap().contains(",grasp,detour,none,greedy,"));
}

#[test]
fn small_graphs_get_the_advisory() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(grasp(d, &["gen", "--family", "lattice", "--rows", "6", "--cols", "6", "--k-star", "5"]));
    let (_, stderr) = ok(grasp(d, &["attack", "--instance", d.join("instance.json").to_str().unwrap(), "--method", "baseline"]));
    assert!(stderr.contains("60 edges"), "{stderr}");
}

#[test]
fn gat_scorer_without_weights_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_ba(d);
    let out = grasp(d, &["attack", "--instance", d.join("instance.json").to_str().unwrap(), "--method", "grasp", "--scorer", "gat"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--weights"));
}

#[test]
fn features_csv_has_named_columns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen_ba(d);
    ok(grasp(d, &["features", "--instance", d.join("instance.json").to_str().unwrap(), "--families", "structural,flow"]));
    let csv = fs::read_to_string(d.join("features.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 10);
    assert_eq!(header[0], "degree");
    assert_eq!(header[9], "max_flow");
    assert_eq!(csv.lines().count(), 251);
}

#[test]
fn bench_and_summarize_produce_tables_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let suite = d.join("suite.toml");
    fs::write(
        &suite,
        r#"
instances = 2
k_star = 15

[[generators]]
family = "ws"
n = 120
k = 6
p_rewire = 0.05

[[methods]]
method = "pathattack"

[[methods]]
method = "grasp"
scorer = "detour"
"#,
    )
    .unwrap();
    let out_dir = d.join("run");
    let (stdout, _) = ok(grasp(&out_dir, &["--seed", "9", "--threads", "2", "bench", suite.to_str().unwrap()]));
    assert!(stdout.contains("4 rows"));
    let csv = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(11) == Some("true")));
    assert!(out_dir.join("summary.csv").exists());
    assert!(out_dir.join("plots/synthetic_edges_cut.svg").exists());

    let again = d.join("again");
    ok(grasp(&again, &["summarize", out_dir.join("results.csv").to_str().unwrap()]));
    assert_eq!(
        fs::read_to_string(again.join("summary.csv")).unwrap(),
        fs::read_to_string(out_dir.join("summary.csv")).unwrap()
    );
}

#[test]
fn summarize_of_empty_csv_makes_no_plots() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("empty.csv"), format!("{HEADER}\n")).unwrap();
    let (stdout, _) = ok(grasp(d, &["summarize", d.join("empty.csv").to_str().unwrap()]));
    assert!(stdout.contains("no rows"));
    assert!(!d.join("plots").exists());
}

#[test]
fn scaling_sweeps_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(grasp(d, &["scaling", "--sizes", "120,200", "--instances", "1", "--k-star", "10"]));
    let csv = fs::read_to_string(d.join("results.csv")).unwrap();
    let ns: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(ns, ["120", "120", "200", "200"]);
    assert!(d.join("plots/scaling_ba_wall_time_ms.svg").exists());
}

#[test]
fn unknown_flags_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = grasp(dir.path(), &["attack", "--method", "magic", "--instance", "x.json"]);
    assert!(!out.status.success());
}
