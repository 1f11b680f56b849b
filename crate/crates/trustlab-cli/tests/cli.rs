//! Command-line behavior: exit codes, formats, determinism.

use std::path::Path;
use std::process::{Command, Output};

use trustlab::report::JsonReport;

fn trustlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trustlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn trustlab_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trustlab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn gen_is_deterministic_per_seed() {
    let a = trustlab(&["gen", "50", "300", "general", "--seed", "9"]);
    let b = trustlab(&["gen", "50", "300", "general", "--seed", "9"]);
    let c = trustlab(&["gen", "50", "300", "general", "--seed", "10"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn gen_rejects_infeasible_edge_counts() {
    let out = trustlab(&["gen", "4", "100", "general", "--seed", "1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("12"));
}

#[test]
fn gen_dot_output() {
    let out = trustlab(&[
        "gen",
        "4",
        "4",
        "cycle-demo",
        "--seed",
        "1",
        "--format",
        "dot",
    ]);
    assert_eq!(code(&out), 0);
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("\"1\" -> \"2\""));
}

#[test]
fn eval_pipeline_on_the_cycle_demo() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("demo.csv");
    let out = trustlab(&["gen", "4", "4", "cycle-demo", "--seed", "1"]);
    std::fs::write(&graph, &out.stdout).unwrap();

    let result = trustlab(&["eval", graph.to_str().unwrap()]);
    assert_eq!(code(&result), 0);
    let csv = String::from_utf8(result.stdout).unwrap();
    assert!(csv.starts_with("src,dst,td,dtd\n"));
    // Entry (1,3) of the converged matrix is (a + a.b.c.d).b; by hand:
    // a.b = ⟨0.725, 0.13⟩, a.b.c = ⟨0.5335, 0.236⟩, a.b.c.d = ⟨0.3909, 0.30165⟩,
    // a + a.b.c.d = ⟨0.93909, 0.0150825⟩, times b → td 0.75278025.
    let line = csv
        .lines()
        .find(|l| l.starts_with("1,3,"))
        .expect("pair (1,3) present");
    let td: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
    assert!((td - 0.75278025).abs() < 1e-9, "got {td}");
}

#[test]
fn eval_parse_errors_exit_2_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("bad.csv");
    std::fs::write(&graph, "A,B,0.9,0.05\nA,B,0.7,0.6\n").unwrap();
    let out = trustlab(&["eval", graph.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");

    let missing = trustlab(&["eval", "no-such-file.csv"]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn eval_engine_conflicts_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cyclic = dir.path().join("cyclic.csv");
    std::fs::write(&cyclic, "A,B,0.5,0.2\nB,A,0.5,0.2\n").unwrap();
    let out = trustlab(&["eval", cyclic.to_str().unwrap(), "--engine", "dag"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("general"));

    let acyclic = dir.path().join("chain.csv");
    std::fs::write(&acyclic, "A,B,0.5,0.2\n").unwrap();
    let out = trustlab(&[
        "eval",
        acyclic.to_str().unwrap(),
        "--engine",
        "dag",
        "--max-len",
        "3",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_passes_on_acyclic_and_flags_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("chain.csv");
    std::fs::write(&graph, "A,B,0.9,0.05\nB,C,0.8,0.1\nC,D,0.7,0.2\n").unwrap();

    let ok = trustlab(&["eval", graph.to_str().unwrap(), "--verify"]);
    assert_eq!(code(&ok), 0);
    assert!(String::from_utf8_lossy(&ok.stderr).contains("verification passed"));

    // A truncated run genuinely disagrees with the all-paths reference.
    let truncated = trustlab(&[
        "eval",
        graph.to_str().unwrap(),
        "--verify",
        "--max-iters",
        "1",
    ]);
    assert_eq!(code(&truncated), 1);
    assert!(String::from_utf8_lossy(&truncated.stderr).contains("FAILED"));

    // Verification needs the acyclic reference.
    let cyclic = dir.path().join("cyclic.csv");
    std::fs::write(&cyclic, "A,B,0.5,0.2\nB,A,0.5,0.2\n").unwrap();
    let out = trustlab(&["eval", cyclic.to_str().unwrap(), "--verify"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn eval_json_report_parses_and_is_versioned() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.csv");
    std::fs::write(&graph, "A,B,0.9,0.05\nB,C,0.8,0.1\n").unwrap();
    let out = trustlab(&["eval", graph.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let report = JsonReport::from_json_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.schema_version, 1);
    assert_eq!(report.engine, "dag");
    assert_eq!(report.nodes, 3);
    assert_eq!(report.pairs.len(), 3);
    assert_eq!(report.trace.len() as u32, report.iterations);
}

#[test]
fn eval_reads_json_graphs_too() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    std::fs::write(&csv, "A,B,0.9,0.05\n").unwrap();
    let gen = trustlab(&[
        "gen", "6", "12", "general", "--seed", "4", "--format", "json",
    ]);
    let json_path = dir.path().join("g.json");
    std::fs::write(&json_path, &gen.stdout).unwrap();
    let out = trustlab(&["eval", json_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
}

#[test]
fn bench_lists_suites_without_arguments_and_validates_input() {
    let out = trustlab(&["bench"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for suite in ["dag-1k", "general-1k", "bounded", "all"] {
        assert!(text.contains(suite), "missing {suite} in:\n{text}");
    }

    let missing_seed = trustlab(&["bench", "bounded"]);
    assert_eq!(code(&missing_seed), 2);
    assert!(String::from_utf8_lossy(&missing_seed.stderr).contains("--seed"));

    let unknown = trustlab(&["bench", "nope", "--seed", "1"]);
    assert_eq!(code(&unknown), 2);
}

#[test]
fn usage_errors_exit_2_help_exits_0() {
    let out = trustlab(&["eval"]);
    assert_eq!(code(&out), 2);
    let out = trustlab(&["--definitely-not-a-flag"]);
    assert_eq!(code(&out), 2);
    let out = trustlab(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("eval"));
}

#[test]
fn threads_env_var_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.csv"), "A,B,0.9,0.05\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_trustlab"))
        .current_dir(dir.path())
        .env("TRUSTLAB_THREADS", "2")
        .args(["eval", "g.csv"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    // An unusable value is a usage error, not a silent fallback.
    let out = Command::new(env!("CARGO_BIN_EXE_trustlab"))
        .current_dir(dir.path())
        .env("TRUSTLAB_THREADS", "not-a-number")
        .args(["eval", "g.csv"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn bounded_eval_flags_flow_through() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("chain.csv");
    std::fs::write(
        &graph,
        "A,B,0.5,0.1\nB,C,0.5,0.1\nC,D,0.5,0.1\nD,E,0.5,0.1\n",
    )
    .unwrap();
    let out = trustlab_in(
        dir.path(),
        &["eval", "chain.csv", "--max-len", "2", "--format", "json"],
    );
    assert_eq!(code(&out), 0);
    let report = JsonReport::from_json_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.engine, "general");
    assert!(report.approximate);
    assert_eq!(report.iterations, 2);
}
