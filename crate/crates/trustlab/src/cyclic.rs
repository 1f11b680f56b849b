//! Evaluation on arbitrary directed graphs, cycles included.
//!
//! The plain power iteration never settles on a cyclic graph: every pass
//! around a cycle re-aggregates the same edges. This engine therefore tracks,
//! for every ordered pair, the set of edges already consumed in that pair's
//! value — the edge memory. An iteration recomputes a pair exactly like the
//! trust-matrix product, unions the memories of its contributing terms, and
//! keeps the new value only if the union brings in an edge the pair had not
//! seen; otherwise the pair reverts to its previous value and memory. Once no
//! pair learns a new edge the state is a fixpoint.
//!
//! Memory sets grow monotonically and are bounded by the edge count, so
//! termination needs no iteration cap. Bounded evaluation truncates earlier:
//! it stops after a fixed number of iterations and can freeze pairs whose
//! trust degree already exceeds a threshold.

use std::time::Instant;

use rayon::prelude::*;

use crate::algebra::{TrustTriple, FULL_TRUST, NO_RELATION};
use crate::error::EngineError;
use crate::graph::TrustGraph;
use crate::matrix::{accumulate_checked, TrustMatrix};
use crate::report::{EvalOptions, EvalReport, IterationStat, StepStats, Termination};

/// Storage for the per-pair edge-id sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MemoryBackend {
    /// Fixed-width bitsets when n²·φ bits fit the budget, sorted id lists
    /// otherwise (huge graphs keep only small sets alive for few iterations).
    #[default]
    Auto,
    Bitset,
    SortedList,
}

/// Per-buffer ceiling for bitset memory before falling back to sorted lists.
const BITSET_BUDGET_BYTES: usize = 384 << 20;

/// One row of sorted-list memory: the n per-pair id lists concatenated, with
/// `offsets[j]..offsets[j+1]` delimiting pair (i, j). Contiguous storage
/// keeps the unions walking cache lines instead of chasing a million tiny
/// allocations. Rows are rebuilt wholesale each sweep; this backing only
/// runs on graphs too large for bitsets, where few sweeps happen.
#[derive(Debug, Clone, Default)]
struct ArenaRow {
    offsets: Vec<u32>,
    data: Vec<u32>,
}

impl ArenaRow {
    fn set(&self, j: usize) -> &[u32] {
        &self.data[self.offsets[j] as usize..self.offsets[j + 1] as usize]
    }
}

#[derive(Debug, Clone)]
enum MemStore {
    /// n² sets of `words` u64 each, row-major by (i, j).
    Bitset { words: usize, bits: Vec<u64> },
    /// One compact row of sorted lists per source node.
    Arena(Vec<ArenaRow>),
}

impl MemStore {
    /// Initial memory: the singleton {edge id} for every direct edge.
    fn from_graph(backend: MemoryBackend, g: &TrustGraph) -> Self {
        let n = g.node_count();
        let words = g.edge_count().div_ceil(64);
        let resolved = match backend {
            MemoryBackend::Auto => {
                if n * n * words * 8 <= BITSET_BUDGET_BYTES {
                    MemoryBackend::Bitset
                } else {
                    MemoryBackend::SortedList
                }
            }
            fixed => fixed,
        };
        match resolved {
            MemoryBackend::SortedList => MemStore::Arena(
                (0..n as u32)
                    .map(|i| {
                        let out = g.out_edges(i);
                        let mut row = ArenaRow {
                            offsets: Vec::with_capacity(n + 1),
                            data: Vec::with_capacity(out.len()),
                        };
                        row.offsets.push(0);
                        let mut next = 0usize;
                        for j in 0..n as u32 {
                            if next < out.len() && out[next].0 == j {
                                row.data.push(out[next].1);
                                next += 1;
                            }
                            row.offsets.push(row.data.len() as u32);
                        }
                        row
                    })
                    .collect(),
            ),
            _ => {
                let mut bits = vec![0u64; n * n * words];
                for (id, e) in g.edges().iter().enumerate() {
                    let pair = e.src as usize * n + e.dst as usize;
                    bits[pair * words + id / 64] |= 1 << (id % 64);
                }
                MemStore::Bitset { words, bits }
            }
        }
    }

    /// Sorted edge ids of one pair's set.
    fn ids(&self, n: usize, i: usize, j: usize) -> Vec<u32> {
        match self {
            MemStore::Bitset { words, bits } => {
                let pair = i * n + j;
                let mut out = Vec::new();
                for (w, &word) in bits[pair * words..(pair + 1) * words].iter().enumerate() {
                    let mut word = word;
                    while word != 0 {
                        out.push((w * 64) as u32 + word.trailing_zeros());
                        word &= word - 1;
                    }
                }
                out
            }
            MemStore::Arena(rows) => rows[i].set(j).to_vec(),
        }
    }
}

struct ColEntry {
    src: u32,
    weight: TrustTriple,
    edge_id: u32,
}

/// Iteration state of the general-graph engine: the current and previous
/// value matrices and edge memories, stepped one full sweep at a time.
pub struct CyclicEval {
    n: usize,
    /// In-edges of every column j, ascending by source.
    cols: Vec<Vec<ColEntry>>,
    /// Columns with at least one in-edge; the only pairs that can ever move.
    reachable_cols: Vec<u32>,
    /// Same set as a lookup mask.
    reachable_mask: Vec<bool>,
    /// Out-neighbor lists for change propagation.
    outs: Vec<Vec<u32>>,
    values: Vec<TrustTriple>,
    prev_values: Vec<TrustTriple>,
    memory: MemStore,
    prev_memory: MemStore,
    /// Pairs accepted (value or memory advanced) in the latest step.
    accepted: Vec<bool>,
    prev_accepted: Vec<bool>,
    frozen: Vec<bool>,
    threshold: f64,
    iteration: u32,
    converged: bool,
}

impl CyclicEval {
    pub fn new(g: &TrustGraph, opts: &EvalOptions) -> Result<Self, EngineError> {
        opts.validate()?;
        let n = g.node_count();
        let mut values = vec![NO_RELATION; n * n];
        for i in 0..n {
            values[i * n + i] = FULL_TRUST;
        }
        for e in g.edges() {
            values[e.src as usize * n + e.dst as usize] = e.weight;
        }
        let memory = MemStore::from_graph(opts.memory, g);
        let cols: Vec<Vec<ColEntry>> = (0..n as u32)
            .map(|j| {
                g.in_edges(j)
                    .iter()
                    .map(|&(src, edge_id)| ColEntry {
                        src,
                        weight: g.edge(edge_id).weight,
                        edge_id,
                    })
                    .collect()
            })
            .collect();
        let reachable_cols: Vec<u32> = (0..n as u32)
            .filter(|&j| !cols[j as usize].is_empty())
            .collect();
        let mut reachable_mask = vec![false; n];
        for &j in &reachable_cols {
            reachable_mask[j as usize] = true;
        }
        let outs = (0..n as u32)
            .map(|k| g.out_edges(k).iter().map(|&(dst, _)| dst).collect())
            .collect();
        Ok(Self {
            n,
            cols,
            reachable_cols,
            reachable_mask,
            outs,
            prev_values: values.clone(),
            prev_memory: memory.clone(),
            values,
            memory,
            accepted: vec![true; n * n],
            prev_accepted: vec![false; n * n],
            frozen: vec![false; n * n],
            threshold: opts.threshold,
            iteration: 1,
            converged: false,
        })
    }

    /// Exponent of the current matrix; 1 before any stepping.
    pub fn iteration(&self) -> u32 {
        self.iteration
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn value(&self, i: u32, j: u32) -> TrustTriple {
        self.values[i as usize * self.n + j as usize]
    }

    /// Current edge-memory set of pair (i, j), as sorted edge ids.
    pub fn memory_edges(&self, i: u32, j: u32) -> Vec<u32> {
        self.memory.ids(self.n, i as usize, j as usize)
    }

    pub fn matrix(&self) -> TrustMatrix {
        TrustMatrix::from_dense_values(self.n, self.values.clone())
    }

    /// Pairs currently locked by the trust threshold, ascending.
    pub fn frozen_pairs(&self) -> Vec<(u32, u32)> {
        self.frozen
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f)
            .map(|(p, _)| ((p / self.n) as u32, (p % self.n) as u32))
            .collect()
    }

    /// One full sweep over all ordered pairs. Stepping a converged state is
    /// the identity.
    pub fn step(&mut self) -> StepStats {
        let n = self.n;
        if n == 0 {
            self.converged = true;
            self.iteration += 1;
            return StepStats {
                max_delta: 0.0,
                changed_pairs: 0,
            };
        }
        if self.threshold < 1.0 {
            for p in 0..n * n {
                if !self.frozen[p] && p / n != p % n && self.values[p].td() > self.threshold {
                    self.frozen[p] = true;
                }
            }
        }
        std::mem::swap(&mut self.values, &mut self.prev_values);
        std::mem::swap(&mut self.memory, &mut self.prev_memory);
        std::mem::swap(&mut self.accepted, &mut self.prev_accepted);

        let cols = &self.cols;
        let outs = &self.outs;
        let prev_values = &self.prev_values;
        let prev_accepted = &self.prev_accepted;
        let frozen = &self.frozen;
        // On the first sweep everything is dirty; visiting every reachable
        // column directly skips a full change-propagation pass.
        let visit_all: Option<&[u32]> =
            (self.iteration == 1).then_some(self.reachable_cols.as_slice());
        let reachable_mask = &self.reachable_mask;

        let (delta, count) = match (&mut self.memory, &self.prev_memory) {
            (
                MemStore::Bitset { words, bits },
                MemStore::Bitset {
                    bits: prev_bits, ..
                },
            ) => {
                let words = *words;
                bits.par_chunks_mut((n * words).max(1))
                    .zip(self.values.par_chunks_mut(n))
                    .zip(self.accepted.par_chunks_mut(n))
                    .enumerate()
                    .map_init(
                        || RowScratch::new(n),
                        |scratch, (i, ((mem_row, val_row), acc_row))| {
                            step_row_bitset(
                                i,
                                n,
                                words,
                                cols,
                                outs,
                                prev_values,
                                prev_bits,
                                prev_accepted,
                                frozen,
                                visit_all,
                                mem_row,
                                val_row,
                                acc_row,
                                scratch,
                            )
                        },
                    )
                    .reduce(|| (0.0f64, 0usize), |a, b| (a.0.max(b.0), a.1 + b.1))
            }
            (MemStore::Arena(rows), MemStore::Arena(prev_rows)) => rows
                .par_iter_mut()
                .zip(self.values.par_chunks_mut(n))
                .zip(self.accepted.par_chunks_mut(n))
                .enumerate()
                .map_init(
                    || RowScratch::new(n),
                    |scratch, (i, ((mem_row, val_row), acc_row))| {
                        step_row_arena(
                            i,
                            n,
                            cols,
                            outs,
                            prev_values,
                            &prev_rows[i],
                            prev_accepted,
                            frozen,
                            visit_all.map(|_| reachable_mask.as_slice()),
                            mem_row,
                            val_row,
                            acc_row,
                            scratch,
                        )
                    },
                )
                .reduce(|| (0.0f64, 0usize), |a, b| (a.0.max(b.0), a.1 + b.1)),
            _ => unreachable!("memory buffers always share a backing"),
        };

        self.iteration += 1;
        self.converged = count == 0;
        StepStats {
            max_delta: delta,
            changed_pairs: count,
        }
    }
}

struct RowScratch {
    marks: Vec<bool>,
    touched: Vec<u32>,
    ids: Vec<u32>,
}

impl RowScratch {
    fn new(n: usize) -> Self {
        Self {
            marks: vec![false; n],
            touched: Vec::new(),
            ids: Vec::new(),
        }
    }
}

/// Marks columns that may change this sweep: out-neighbors of any pair the
/// row accepted last sweep. Unmarked pairs would recompute to exactly their
/// previous decision, so they are copied instead.
fn mark_dirty_columns(
    i: usize,
    n: usize,
    outs: &[Vec<u32>],
    prev_accepted: &[bool],
    marks: &mut [bool],
    touched: &mut Vec<u32>,
) {
    let acc_row = &prev_accepted[i * n..(i + 1) * n];
    for (k, was) in acc_row.iter().enumerate() {
        if *was {
            for &j in &outs[k] {
                if !marks[j as usize] {
                    marks[j as usize] = true;
                    touched.push(j);
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn step_row_bitset(
    i: usize,
    n: usize,
    words: usize,
    cols: &[Vec<ColEntry>],
    outs: &[Vec<u32>],
    prev_values: &[TrustTriple],
    prev_bits: &[u64],
    prev_accepted: &[bool],
    frozen: &[bool],
    visit_all: Option<&[u32]>,
    mem_row: &mut [u64],
    val_row: &mut [TrustTriple],
    acc_row: &mut [bool],
    scratch: &mut RowScratch,
) -> (f64, usize) {
    let prev_row = &prev_values[i * n..(i + 1) * n];
    let prev_mem_row = &prev_bits[i * n * words..(i + 1) * n * words];
    val_row.copy_from_slice(prev_row);
    mem_row.copy_from_slice(prev_mem_row);
    acc_row.fill(false);

    let RowScratch { marks, touched, .. } = scratch;
    let visit: &[u32] = match visit_all {
        Some(all) => all,
        None => {
            mark_dirty_columns(i, n, outs, prev_accepted, marks, touched);
            touched
        }
    };
    let mut delta = 0.0f64;
    let mut count = 0usize;
    for &j in visit {
        let j = j as usize;
        if j == i || frozen[i * n + j] {
            continue;
        }
        let slot = &mut mem_row[j * words..(j + 1) * words];
        slot.fill(0);
        let mut acc = NO_RELATION;
        for e in &cols[j] {
            let k = e.src as usize;
            if accumulate_checked(&mut acc, prev_row[k], e.weight) {
                for (w, s) in slot.iter_mut().enumerate() {
                    *s |= prev_mem_row[k * words + w];
                }
                slot[e.edge_id as usize / 64] |= 1 << (e.edge_id % 64);
            }
        }
        let prev_set = &prev_mem_row[j * words..(j + 1) * words];
        let grew = slot.iter().zip(prev_set).any(|(c, p)| c & !p != 0);
        if grew {
            delta = delta.max(acc.component_delta(prev_row[j]));
            count += 1;
            val_row[j] = acc;
            acc_row[j] = true;
        } else {
            val_row[j] = prev_row[j];
            slot.copy_from_slice(prev_set);
        }
    }
    if visit_all.is_none() {
        for &j in touched.iter() {
            marks[j as usize] = false;
        }
        touched.clear();
    }
    (delta, count)
}

/// Arena rows are rebuilt in ascending j order: recomputed pairs append
/// their candidate union, everything else copies its previous slice.
#[allow(clippy::too_many_arguments)]
fn step_row_arena(
    i: usize,
    n: usize,
    cols: &[Vec<ColEntry>],
    outs: &[Vec<u32>],
    prev_values: &[TrustTriple],
    prev_mem: &ArenaRow,
    prev_accepted: &[bool],
    frozen: &[bool],
    visit_all_mask: Option<&[bool]>,
    mem_row: &mut ArenaRow,
    val_row: &mut [TrustTriple],
    acc_row: &mut [bool],
    scratch: &mut RowScratch,
) -> (f64, usize) {
    let prev_row = &prev_values[i * n..(i + 1) * n];
    val_row.copy_from_slice(prev_row);
    acc_row.fill(false);

    let RowScratch {
        marks,
        touched,
        ids,
    } = scratch;
    let dirty: &[bool] = match visit_all_mask {
        Some(mask) => mask,
        None => {
            mark_dirty_columns(i, n, outs, prev_accepted, marks, touched);
            marks
        }
    };
    let mut delta = 0.0f64;
    let mut count = 0usize;
    mem_row.offsets.clear();
    mem_row.data.clear();
    mem_row.offsets.push(0);
    for j in 0..n {
        if j == i || !dirty[j] || frozen[i * n + j] {
            mem_row.data.extend_from_slice(prev_mem.set(j));
            mem_row.offsets.push(mem_row.data.len() as u32);
            continue;
        }
        ids.clear();
        let mut acc = NO_RELATION;
        for e in &cols[j] {
            let k = e.src as usize;
            if accumulate_checked(&mut acc, prev_row[k], e.weight) {
                ids.extend_from_slice(prev_mem.set(k));
                ids.push(e.edge_id);
            }
        }
        ids.sort_unstable();
        ids.dedup();
        let prev_set = prev_mem.set(j);
        if is_subset(ids, prev_set) {
            mem_row.data.extend_from_slice(prev_set);
        } else {
            delta = delta.max(acc.component_delta(prev_row[j]));
            count += 1;
            val_row[j] = acc;
            acc_row[j] = true;
            mem_row.data.extend_from_slice(ids);
        }
        mem_row.offsets.push(mem_row.data.len() as u32);
    }
    if visit_all_mask.is_none() {
        for &j in touched.iter() {
            marks[j as usize] = false;
        }
        touched.clear();
    }
    (delta, count)
}

/// Is sorted `a` a subset of sorted `b`?
fn is_subset(a: &[u32], b: &[u32]) -> bool {
    let mut pos = 0usize;
    for &x in a {
        while pos < b.len() && b[pos] < x {
            pos += 1;
        }
        if pos == b.len() || b[pos] != x {
            return false;
        }
        pos += 1;
    }
    true
}

/// Evaluates trust between all pairs of an arbitrary directed graph.
///
/// Runs the edge-memory iteration until nothing changes (value and memory
/// both stable — the exact fixpoint), until the largest componentwise change
/// drops to `opts.epsilon` (when nonzero), or until `opts.max_iters` /
/// `opts.max_len` sweeps have run. A trust `opts.threshold` below 1 freezes
/// high-trust pairs as they appear.
pub fn evaluate_general(g: &TrustGraph, opts: &EvalOptions) -> Result<EvalReport, EngineError> {
    opts.validate()?;
    opts.run(|| {
        let mut eval = CyclicEval::new(g, opts)?;
        let mut trace = Vec::new();
        let termination = loop {
            let started = Instant::now();
            let stats = eval.step();
            trace.push(IterationStat {
                max_delta: stats.max_delta,
                changed_pairs: stats.changed_pairs,
                seconds: started.elapsed().as_secs_f64(),
            });
            if eval.converged() {
                break Termination::Fixpoint;
            }
            if opts.epsilon > 0.0 && stats.max_delta <= opts.epsilon {
                break Termination::Epsilon;
            }
            let steps = trace.len() as u32;
            if opts.max_len.is_some_and(|cap| steps >= cap) {
                break Termination::Bounded;
            }
            if opts.max_iters.is_some_and(|cap| steps >= cap) {
                break Termination::MaxIters;
            }
        };
        let frozen_pairs = eval.frozen_pairs();
        let approximate = termination != Termination::Fixpoint || !frozen_pairs.is_empty();
        Ok(EvalReport {
            matrix: eval.matrix(),
            iterations: trace.len() as u32,
            termination,
            approximate,
            trace,
            frozen_pairs,
        })
    })?
}

/// Bounded evaluation: at most `max_len` sweeps (`None` for unbounded) and a
/// freeze `threshold` on the trust degree. With `max_len = None` and
/// `threshold = 1.0` this is exactly [`evaluate_general`].
pub fn evaluate_bounded(
    g: &TrustGraph,
    max_len: Option<u32>,
    threshold: f64,
    opts: &EvalOptions,
) -> Result<EvalReport, EngineError> {
    let mut opts = opts.clone();
    opts.max_len = max_len;
    opts.threshold = threshold;
    evaluate_general(g, &opts)
}
