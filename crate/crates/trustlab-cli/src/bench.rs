//! Timing suites behind `trustlab bench`.

use std::time::Instant;

use anyhow::{bail, Result};
use serde_json::json;

use trustlab::graph::{GraphKind, TrustGraph};
use trustlab::report::EvalOptions;
use trustlab::{cyclic, dag};

pub const SUITES: &[(&str, &str)] = &[
    (
        "dag-1k",
        "acyclic 1000 nodes / 250k edges: per-iteration and total convergence time",
    ),
    (
        "general-1k",
        "general 1000 nodes / 250k edges: one edge-memory sweep",
    ),
    (
        "bounded",
        "general 200 nodes, dense: truncated-iteration error against the fixpoint",
    ),
    ("all", "every suite above"),
];

pub struct SuiteOutcome {
    name: &'static str,
    lines: Vec<String>,
    json: serde_json::Value,
}

impl SuiteOutcome {
    pub fn render_text(&self) -> String {
        let mut s = format!("== {} ==\n", self.name);
        for line in &self.lines {
            s.push_str(line);
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "suite": self.name, "metrics": self.json })
    }
}

pub fn run_suite(suite: &str, seed: u64, threads: Option<usize>) -> Result<Vec<SuiteOutcome>> {
    match suite {
        "dag-1k" => Ok(vec![dag_1k(seed, threads)?]),
        "general-1k" => Ok(vec![general_1k(seed, threads)?]),
        "bounded" => Ok(vec![bounded(seed, threads)?]),
        "all" => Ok(vec![
            dag_1k(seed, threads)?,
            general_1k(seed, threads)?,
            bounded(seed, threads)?,
        ]),
        other => bail!("unknown suite {other:?}; run `trustlab bench` for the list"),
    }
}

fn dag_1k(seed: u64, threads: Option<usize>) -> Result<SuiteOutcome> {
    let (n, edges) = (1000, 250_000);
    let built = Instant::now();
    let g = TrustGraph::random(n, edges, GraphKind::ConfirmedAcyclic, seed)?;
    let build_secs = built.elapsed().as_secs_f64();

    let opts = EvalOptions {
        threads,
        ..EvalOptions::default()
    };
    let started = Instant::now();
    let report = dag::evaluate(&g, &opts)?;
    let total = started.elapsed().as_secs_f64();

    let mut lines = vec![
        format!(
            "instance        {n} nodes, {edges} edges (seed {seed}), built in {build_secs:.2}s"
        ),
        format!(
            "converged       {} iterations, termination {:?}, total {total:.2}s",
            report.iterations, report.termination
        ),
    ];
    for (i, stat) in report.trace.iter().enumerate() {
        lines.push(format!(
            "iteration {:>3}   {:>8.3}s   changed {:>9}   max-delta {:.3e}",
            i + 1,
            stat.seconds,
            stat.changed_pairs,
            stat.max_delta
        ));
    }
    let json = json!({
        "nodes": n,
        "edges": edges,
        "seed": seed,
        "iterations": report.iterations,
        "termination": report.termination,
        "total_seconds": total,
        "first_iteration_seconds": report.trace.first().map(|s| s.seconds),
        "per_iteration_seconds": report.trace.iter().map(|s| s.seconds).collect::<Vec<_>>(),
    });
    Ok(SuiteOutcome {
        name: "dag-1k",
        lines,
        json,
    })
}

fn general_1k(seed: u64, threads: Option<usize>) -> Result<SuiteOutcome> {
    let (n, edges) = (1000, 250_000);
    let built = Instant::now();
    let g = TrustGraph::random(n, edges, GraphKind::General, seed)?;
    let build_secs = built.elapsed().as_secs_f64();

    let opts = EvalOptions {
        threads,
        max_iters: Some(1),
        ..EvalOptions::default()
    };
    let started = Instant::now();
    let report = cyclic::evaluate_general(&g, &opts)?;
    let total = started.elapsed().as_secs_f64();
    let sweep = report.trace.first().map(|s| s.seconds).unwrap_or(total);

    let lines = vec![
        format!(
            "instance        {n} nodes, {edges} edges (seed {seed}), built in {build_secs:.2}s"
        ),
        format!(
            "one sweep       {sweep:.2}s ({} pairs updated)",
            report.trace[0].changed_pairs
        ),
    ];
    let json = json!({
        "nodes": n,
        "edges": edges,
        "seed": seed,
        "sweep_seconds": sweep,
        "pairs_updated": report.trace[0].changed_pairs,
    });
    Ok(SuiteOutcome {
        name: "general-1k",
        lines,
        json,
    })
}

fn bounded(seed: u64, threads: Option<usize>) -> Result<SuiteOutcome> {
    let n = 200;
    let edges = n * (n - 1) / 10;
    let g = TrustGraph::random(n, edges, GraphKind::General, seed)?;
    let opts = EvalOptions {
        threads,
        ..EvalOptions::default()
    };

    let started = Instant::now();
    let full = cyclic::evaluate_general(&g, &opts)?;
    let full_secs = started.elapsed().as_secs_f64();

    let mut lines = vec![
        format!("instance        {n} nodes, {edges} edges (seed {seed})"),
        format!(
            "full fixpoint   {} iterations in {full_secs:.2}s",
            full.iterations
        ),
    ];
    let mut rows = Vec::new();
    for cap in [5u32, 6, 7, 8] {
        let started = Instant::now();
        let truncated = cyclic::evaluate_bounded(&g, Some(cap), 1.0, &opts)?;
        let secs = started.elapsed().as_secs_f64();
        let (max_err, mean_err) = error_against(&truncated, &full, n as u32);
        lines.push(format!(
            "{cap} iterations    max error {max_err:.3e}   mean error {mean_err:.3e}   {secs:.2}s"
        ));
        rows.push(json!({
            "iterations": cap,
            "max_error": max_err,
            "mean_error": mean_err,
            "seconds": secs,
        }));
    }
    let json = json!({
        "nodes": n,
        "edges": edges,
        "seed": seed,
        "full_iterations": full.iterations,
        "full_seconds": full_secs,
        "truncated": rows,
    });
    Ok(SuiteOutcome {
        name: "bounded",
        lines,
        json,
    })
}

/// (max, mean) componentwise error across all off-diagonal pairs.
fn error_against(
    approx: &trustlab::EvalReport,
    exact: &trustlab::EvalReport,
    n: u32,
) -> (f64, f64) {
    let mut max = 0.0f64;
    let mut sum = 0.0f64;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = approx
                .matrix
                .get(i, j)
                .component_delta(exact.matrix.get(i, j));
            max = max.max(d);
            sum += d;
            pairs += 1;
        }
    }
    (max, if pairs == 0 { 0.0 } else { sum / pairs as f64 })
}
