use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use trustlab::graph::{GraphFormat, GraphKind, TrustGraph};
use trustlab::report::{EvalOptions, EvalReport, JsonReport};
use trustlab::{cyclic, dag, oracle, TrustTriple};

use crate::bench;

#[derive(Parser)]
#[command(
    name = "trustlab",
    version,
    about = "Evaluate pairwise trust in directed trust graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate all-pairs trust for a graph file
    Eval(EvalArgs),
    /// Generate a graph instance
    Gen(GenArgs),
    /// Run timing suites
    Bench(BenchArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Graph file: CSV edge list (`src,dst,td,dtd`) or JSON
    file: PathBuf,
    /// Engine selection; `auto` picks by acyclicity
    #[arg(long, value_enum, default_value_t = EngineChoice::Auto)]
    engine: EngineChoice,
    /// Convergence tolerance (0 = exact fixpoint)
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Iteration cap
    #[arg(long)]
    max_iters: Option<u32>,
    /// Freeze pairs whose trust degree exceeds this (general engine)
    #[arg(long)]
    threshold: Option<f64>,
    /// Bounded evaluation: stop after this many iterations (general engine)
    #[arg(long)]
    max_len: Option<u32>,
    /// Cross-check against the brute-force reference (acyclic graphs)
    #[arg(long)]
    verify: bool,
    /// Worker threads (default: TRUSTLAB_THREADS or all cores)
    #[arg(long, env = "TRUSTLAB_THREADS")]
    threads: Option<usize>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PairFormat::Csv)]
    format: PairFormat,
    /// Print per-iteration progress to stderr
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Number of nodes
    n: usize,
    /// Number of edges
    edges: usize,
    /// Instance family
    #[arg(value_enum)]
    kind: GenKind,
    /// RNG seed (instances are fully determined by it)
    #[arg(long)]
    seed: u64,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FileFormat::Csv)]
    format: FileFormat,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite to run; omit to list available suites
    suite: Option<String>,
    /// RNG seed for the benchmark instances
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "TRUSTLAB_THREADS")]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = BenchFormat::Text)]
    format: BenchFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineChoice {
    Auto,
    Dag,
    General,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PairFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FileFormat {
    Csv,
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    /// Random acyclic instance
    Dag,
    /// Random directed instance, cycles permitted
    General,
    /// The fixed 4-node one-cycle demonstration graph
    CycleDemo,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchFormat {
    Text,
    Json,
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Eval(args) => cmd_eval(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn load_graph(path: &Path) -> Result<TrustGraph> {
    let bytes =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let looks_json =
        path.extension().is_some_and(|e| e == "json") || bytes.trim_start().starts_with('{');
    let graph = if looks_json {
        TrustGraph::from_json_str(&bytes)
    } else {
        TrustGraph::from_csv_str(&bytes)
    }
    .with_context(|| format!("cannot parse {}", path.display()))?;
    Ok(graph)
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<ExitCode> {
    let g = load_graph(&args.file)?;
    let acyclic = g.is_acyclic();
    let bounded_flags = args.threshold.is_some() || args.max_len.is_some();

    let engine = match args.engine {
        EngineChoice::Dag if bounded_flags => {
            bail!("--threshold/--max-len are general-engine options; drop --engine dag")
        }
        EngineChoice::Dag if !acyclic => {
            bail!("graph contains a directed cycle; use --engine general")
        }
        EngineChoice::Dag => EngineChoice::Dag,
        EngineChoice::General => EngineChoice::General,
        EngineChoice::Auto if acyclic && !bounded_flags => EngineChoice::Dag,
        EngineChoice::Auto => EngineChoice::General,
    };

    let opts = EvalOptions {
        epsilon: args.epsilon,
        max_iters: args.max_iters,
        threads: args.threads,
        trace: args.trace,
        threshold: args.threshold.unwrap_or(1.0),
        max_len: args.max_len,
        ..EvalOptions::default()
    };

    let (report, engine_name) = match engine {
        EngineChoice::Dag => (dag::evaluate(&g, &opts)?, "dag"),
        _ => (cyclic::evaluate_general(&g, &opts)?, "general"),
    };

    if args.trace {
        for (idx, stat) in report.trace.iter().enumerate() {
            eprintln!(
                "iter {:>4}  max-delta {:>12.5e}  changed {:>9}  {:>9.4}s",
                idx + 1,
                stat.max_delta,
                stat.changed_pairs,
                stat.seconds
            );
        }
        eprintln!(
            "done: {} iterations, termination {:?}",
            report.iterations, report.termination
        );
    }

    if args.verify {
        if !acyclic {
            bail!("--verify needs an acyclic graph (the reference evaluator refuses cycles)");
        }
        if let Err(mismatch) = verify_against_oracle(&g, &report) {
            eprintln!("verification FAILED: {mismatch}");
            emit_pairs(&args, &g, &report, engine_name)?;
            return Ok(ExitCode::from(1));
        }
        eprintln!("verification passed: engine matches the reference on all pairs");
    }

    emit_pairs(&args, &g, &report, engine_name)?;
    Ok(ExitCode::SUCCESS)
}

fn emit_pairs(args: &EvalArgs, g: &TrustGraph, report: &EvalReport, engine: &str) -> Result<()> {
    let content = match args.format {
        PairFormat::Csv => report.to_csv(g),
        PairFormat::Json => {
            let mut s = JsonReport::new(report, g, engine).to_json_string();
            s.push('\n');
            s
        }
    };
    write_output(args.out.as_deref(), &content)
}

fn verify_against_oracle(g: &TrustGraph, report: &EvalReport) -> Result<(), String> {
    let n = g.node_count() as u32;
    for a in 0..n {
        let reference = oracle::recursive_eval_from(g, a, None)
            .map_err(|e| format!("reference evaluation failed: {e}"))?;
        for b in 0..n {
            let got = report.matrix.get(a, b);
            let expect = reference[b as usize];
            if !got.approx_eq(expect, 1e-12) {
                return Err(format!(
                    "pair ({}, {}): engine {} vs reference {}",
                    g.node_id(a),
                    g.node_id(b),
                    got,
                    expect
                ));
            }
        }
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let g = match args.kind {
        GenKind::Dag => {
            TrustGraph::random(args.n, args.edges, GraphKind::ConfirmedAcyclic, args.seed)?
        }
        GenKind::General => TrustGraph::random(args.n, args.edges, GraphKind::General, args.seed)?,
        GenKind::CycleDemo => {
            if args.n != 4 || args.edges != 4 {
                bail!("the cycle demo is a fixed 4-node, 4-edge instance; pass `4 4`");
            }
            TrustGraph::one_cycle_demo(
                triple(0.9, 0.05),
                triple(0.8, 0.1),
                triple(0.7, 0.2),
                triple(0.6, 0.3),
            )
        }
    };
    let format = match args.format {
        FileFormat::Csv => GraphFormat::Csv,
        FileFormat::Json => GraphFormat::Json,
        FileFormat::Dot => GraphFormat::Dot,
    };
    write_output(args.out.as_deref(), &g.export(format))?;
    Ok(ExitCode::SUCCESS)
}

fn triple(td: f64, dtd: f64) -> TrustTriple {
    TrustTriple::new(td, dtd).expect("static weights are valid")
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let Some(suite) = args.suite.as_deref() else {
        println!("available suites:");
        for (name, blurb) in bench::SUITES {
            println!("  {name:<12} {blurb}");
        }
        return Ok(ExitCode::SUCCESS);
    };
    let seed = args
        .seed
        .ok_or_else(|| anyhow!("benchmarks need an explicit --seed for reproducibility"))?;
    let outcomes = bench::run_suite(suite, seed, args.threads)?;
    match args.format {
        BenchFormat::Text => {
            for outcome in &outcomes {
                println!("{}", outcome.render_text());
            }
        }
        BenchFormat::Json => {
            let docs: Vec<serde_json::Value> = outcomes.iter().map(|o| o.to_json()).collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "schema_version": 1,
                    "seed": seed,
                    "suites": docs,
                }))?
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
