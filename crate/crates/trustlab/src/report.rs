//! Evaluation options and the report both engines produce.

use serde::{Deserialize, Serialize};

use crate::cyclic::MemoryBackend;
use crate::error::EngineError;
use crate::graph::TrustGraph;
use crate::matrix::{MatrixBackend, TrustMatrix};

/// Knobs shared by both engines. The zero-valued defaults ask for the exact
/// fixpoint; `threshold`/`max_len` only matter to bounded evaluation.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Componentwise convergence tolerance; 0 demands the exact fixpoint.
    pub epsilon: f64,
    /// Cap on iterations (matrix products); defaults to the node count.
    pub max_iters: Option<u32>,
    /// Storage for the iterated matrix.
    pub backend: MatrixBackend,
    /// Storage for edge-memory sets (general engine only).
    pub memory: MemoryBackend,
    /// Freeze a pair once its trust degree exceeds this (bounded evaluation).
    pub threshold: f64,
    /// Iteration budget for bounded evaluation.
    pub max_len: Option<u32>,
    /// Ask the CLI to print per-iteration progress.
    pub trace: bool,
    /// Worker threads; `None` uses the global pool. Results do not depend on
    /// this value.
    pub threads: Option<usize>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            max_iters: None,
            backend: MatrixBackend::Auto,
            memory: MemoryBackend::Auto,
            threshold: 1.0,
            max_len: None,
            trace: false,
            threads: None,
        }
    }
}

impl EvalOptions {
    pub fn validate(&self) -> Result<(), EngineError> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(EngineError::InvalidOptions(format!(
                "epsilon must be a finite value >= 0, got {}",
                self.epsilon
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(EngineError::InvalidOptions(format!(
                "threshold must lie in [0, 1], got {}",
                self.threshold
            )));
        }
        if self.max_iters == Some(0) {
            return Err(EngineError::InvalidOptions(
                "max_iters must be at least 1".into(),
            ));
        }
        if self.max_len == Some(0) {
            return Err(EngineError::InvalidOptions(
                "max_len must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Runs `f` on a dedicated pool of `threads` workers when set.
    pub(crate) fn run<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T, EngineError> {
        match self.threads {
            None => Ok(f()),
            Some(threads) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| EngineError::InvalidOptions(format!("thread pool: {e}")))?;
                Ok(pool.install(f))
            }
        }
    }
}

/// What one engine iteration did.
#[derive(Debug, Clone, Copy)]
pub struct StepStats {
    /// Largest componentwise change across all pairs.
    pub max_delta: f64,
    /// Number of pairs whose value or memory changed.
    pub changed_pairs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Exact fixpoint reached (nothing changed in the last iteration).
    Fixpoint,
    /// Early stop: largest componentwise change fell below epsilon.
    Epsilon,
    /// Iteration cap hit before convergence.
    MaxIters,
    /// Bounded evaluation exhausted its iteration budget.
    Bounded,
}

/// Per-iteration measurements, in iteration order.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IterationStat {
    /// Largest componentwise change any pair saw this iteration.
    pub max_delta: f64,
    /// Pairs that took a new value or memory this iteration.
    pub changed_pairs: usize,
    /// Wall-clock seconds spent in this iteration.
    pub seconds: f64,
}

/// Outcome of an evaluation: the converged (or truncated) matrix plus how the
/// run went.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub matrix: TrustMatrix,
    /// Number of iterations (matrix products) performed.
    pub iterations: u32,
    pub termination: Termination,
    /// One entry per iteration.
    pub trace: Vec<IterationStat>,
    /// True when the result may differ from the exact fixpoint.
    pub approximate: bool,
    /// Pairs locked by the trust threshold during bounded evaluation.
    pub frozen_pairs: Vec<(u32, u32)>,
}

impl EvalReport {
    /// Off-diagonal pairs with a non-⟨0,0,1⟩ result as CSV, ascending by
    /// (src, dst) index; the same schema an edge list uses.
    pub fn to_csv(&self, g: &TrustGraph) -> String {
        let mut s = String::from("src,dst,td,dtd\n");
        for (i, j, v) in self.matrix.nonzero_pairs() {
            use std::fmt::Write as _;
            writeln!(s, "{},{},{}", g.node_id(i), g.node_id(j), v).unwrap();
        }
        s
    }
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Serialized form of an [`EvalReport`]; the JSON the CLI emits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonReport {
    pub schema_version: u32,
    pub engine: String,
    pub nodes: usize,
    pub edges: usize,
    pub iterations: u32,
    pub termination: Termination,
    pub approximate: bool,
    pub trace: Vec<IterationStat>,
    /// Frozen pairs by external node id.
    pub frozen: Vec<(String, String)>,
    /// All off-diagonal pairs with non-⟨0,0,1⟩ trust, ascending.
    pub pairs: Vec<JsonPair>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonPair {
    pub src: String,
    pub dst: String,
    pub td: f64,
    pub dtd: f64,
}

impl JsonReport {
    pub fn new(report: &EvalReport, g: &TrustGraph, engine: &str) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            engine: engine.to_owned(),
            nodes: g.node_count(),
            edges: g.edge_count(),
            iterations: report.iterations,
            termination: report.termination,
            approximate: report.approximate,
            trace: report.trace.clone(),
            frozen: report
                .frozen_pairs
                .iter()
                .map(|&(i, j)| (g.node_id(i).to_owned(), g.node_id(j).to_owned()))
                .collect(),
            pairs: report
                .matrix
                .nonzero_pairs()
                .into_iter()
                .map(|(i, j, v)| JsonPair {
                    src: g.node_id(i).to_owned(),
                    dst: g.node_id(j).to_owned(),
                    td: v.td(),
                    dtd: v.dtd(),
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
