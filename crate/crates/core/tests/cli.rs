mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use treepersist::growth::grow;
use treepersist::tree::parse_edge_list;
use treepersist::{GrowingTree, ModelKind, ModelSpec, RngStream, SeedGraph};

fn treepersist(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treepersist")).args(args).current_dir(dir).output().unwrap()
}

fn stdout_of(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn grown_file_round_trips_through_centroid() {
    let dir = tempfile::tempdir().unwrap();
    let out = treepersist(&["grow", "--model", "ua", "--n", "800", "--seed", "31", "--out", "t.txt", "--events", "e.jsonl"], dir.path());
    stdout_of(&out);

    let text = std::fs::read_to_string(dir.path().join("t.txt")).unwrap();
    let edges = parse_edge_list(&text).unwrap();
    // Same stream as the CLI: base seed, stream 0.
    let spec = ModelSpec::new(ModelKind::UniformAttachment);
    let mine = grow(&spec, 800, &mut RngStream::new(31, 0).rng(), |_, _| {}).unwrap();
    assert_eq!(edges, mine.edges());

    let events: Vec<Value> = std::fs::read_to_string(dir.path().join("e.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(events.len(), 799);
    assert_eq!(events[10]["new_vertex"], 11);
    assert_eq!(events[10]["parent"], edges[10].1);

    let report: Value = serde_json::from_str(&stdout_of(&treepersist(&["topk", "--in", "t.txt", "--k", "4"], dir.path()))).unwrap();
    let adj = common::adjacency(800, &edges);
    let (truth, psi) = common::centroids_brute(&adj);
    assert_eq!(report["n"], 800);
    assert_eq!(report["centroids"], serde_json::json!(truth));
    assert_eq!(report["psi"], psi);
    let (top, tied) = common::top_k_brute(&adj, 4);
    let listed: Vec<(usize, usize)> = report["topk"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["vertex"].as_u64().unwrap() as usize, e["psi"].as_u64().unwrap() as usize))
        .collect();
    assert_eq!(listed, top);
    assert_eq!(report["boundary_tied"], tied);
}

#[test]
fn seeded_ball_growth_respects_host_degree() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout_of(&treepersist(&["grow", "--model", "diff:4", "--n", "600", "--seed", "2", "--ball", "2"], dir.path()));
    let tree = GrowingTree::new_tree(&parse_edge_list(&text).unwrap()).unwrap();
    assert_eq!(tree.n(), 600);
    assert!(tree.degrees().iter().all(|&d| d <= 4));
    // The 17-vertex seed ball sits in front of the grown vertices.
    let ball = ModelSpec::with_seed(ModelKind::DiffusionRegular { d: 4 }, SeedGraph::RBall { r: 2 }).seed_edges().unwrap();
    assert_eq!(tree.edges()[..ball.len()], ball[..]);
}

#[test]
fn walk_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout_of(&treepersist(&["walk", "--model", "ua", "--a-range", "2:5", "--m-max", "3000"], dir.path()));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "A,f_series,f_dp,tail_series,tail_dp,ratio_2A");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][0], 2.0);
    assert!((rows[0][1] - 0.5).abs() < 1e-3);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
}

#[test]
fn urn_summary_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout_of(&treepersist(
        &["urn", "--model", "pa", "--a", "2", "--steps", "3000", "--reps", "60", "--seed", "4", "--summary", "s.json"],
        dir.path(),
    ));
    assert_eq!(csv.lines().count(), 61);
    assert!(csv.starts_with("replicate,frac_0,frac_1\n"));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(summary["reps"], 60);
    assert_eq!(summary["law"]["kind"], "Beta");
    // Offset -1/2 on sizes (2, 1): Beta(3/2, 1/2).
    assert_eq!(summary["law"]["a"], 1.5);
    assert!(summary["ks_p"].as_f64().unwrap() > 0.0);
}

#[test]
fn persist_and_hub_outputs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("p.json"),
        r#"{"model": {"kind": "ua"}, "n_target": 400, "replicates": 25, "base_seed": 8, "K": 2, "invariant_checks": true}"#,
    )
    .unwrap();
    stdout_of(&treepersist(&["persist", "--config", "p.json", "--out-dir", "out", "--jobs", "2"], dir.path()));
    let traces = std::fs::read_to_string(dir.path().join("out/traces.jsonl")).unwrap();
    assert_eq!(traces.lines().count(), 25);
    let first: Value = serde_json::from_str(traces.lines().next().unwrap()).unwrap();
    assert_eq!(first["violation_count"], 0);
    assert!(first["final_topk"]["ordered"].is_array());
    let csv = std::fs::read_to_string(dir.path().join("out/aggregate.csv")).unwrap();
    assert!(csv.starts_with("model,n_target,replicates,"));

    std::fs::write(
        dir.path().join("h.json"),
        r#"{"model": {"kind": "ua"}, "n_target": 300, "replicates": 20, "base_seed": 9, "sizes": [1, 3]}"#,
    )
    .unwrap();
    let csv = stdout_of(&treepersist(&["hub", "--config", "h.json"], dir.path()));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("ua,300,3,4,20,"));
    assert!(rows[2].contains(",1/20,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| treepersist(args, dir.path()).status.code().unwrap();
    assert_eq!(code(&["calc", "--pk-pa", "3"]), 0);
    assert_eq!(code(&["calc"]), 2);
    assert_eq!(code(&["grow", "--model", "bogus", "--n", "5", "--seed", "1"]), 2);
    assert_eq!(code(&["grow", "--model", "pa", "--n", "5", "--seed", "1", "--ball", "1"]), 3);
    assert_eq!(code(&["walk", "--model", "diff:2", "--a-range", "2:3"]), 2);
    assert_eq!(code(&["persist", "--config", "missing.json"]), 3);
    std::fs::write(dir.path().join("bad.json"), r#"{"model": {"kind": "pa"}, "replicates": 0, "base_seed": 1}"#).unwrap();
    assert_eq!(code(&["persist", "--config", "bad.json"]), 3);
    std::fs::write(dir.path().join("cyc.txt"), "1 0\n2 5\n").unwrap();
    assert_eq!(code(&["centroid", "--in", "cyc.txt"]), 2);
    assert_eq!(String::from_utf8(treepersist(&["calc", "--pk-ua", "3"], dir.path()).stdout).unwrap().lines().next(), Some("1/20"));
}

#[test]
fn seeds_reproduce_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("p.json"),
        r#"{"model": {"kind": "diffusion", "d": 3}, "n_target": 500, "replicates": 16, "base_seed": 77}"#,
    )
    .unwrap();
    let one = stdout_of(&treepersist(&["persist", "--config", "p.json", "--jobs", "1"], dir.path()));
    let four = stdout_of(&treepersist(&["persist", "--config", "p.json", "--jobs", "4"], dir.path()));
    assert_eq!(one, four);
}
