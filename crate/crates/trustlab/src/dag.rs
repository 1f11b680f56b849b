//! Matrix-powers evaluation for acyclic graphs.
//!
//! Repeatedly right-multiplies the iterated matrix by the base adjacency
//! matrix: after d − 1 products the matrix aggregates trust over all paths of
//! length at most d, and on an acyclic graph the iteration reaches an exact
//! fixpoint once d passes the longest path length.
//!
//! Row i of the next iterate is a function of row i of the current iterate
//! and the fixed base matrix alone, so a row that did not change is stable
//! forever and is skipped. Skipping never alters results: recomputing from
//! identical inputs would reproduce identical bits.

use std::time::Instant;

use rayon::prelude::*;

use crate::algebra::{TrustTriple, FULL_TRUST, NO_RELATION};
use crate::error::EngineError;
use crate::graph::TrustGraph;
use crate::matrix::{accumulate, cols_from_rows, MatrixBackend, TrustMatrix};
use crate::report::{EvalOptions, EvalReport, IterationStat, StepStats, Termination};

/// (new row, row changed, max delta, changed entries) of one sparse step.
type SparseRowStep = (Vec<(u32, TrustTriple)>, bool, f64, usize);

enum IterState {
    Dense {
        values: Vec<TrustTriple>,
        /// Pairs that changed in the previous step.
        changed: Vec<bool>,
    },
    Sparse {
        rows: Vec<Vec<(u32, TrustTriple)>>,
        /// Rows that changed in the previous step.
        active: Vec<bool>,
    },
}

/// Driver for the power iteration; exposes the current exponent and matrix so
/// intermediate aggregation depths can be inspected.
pub struct PowerIter {
    n: usize,
    base_rows: Vec<Vec<(u32, TrustTriple)>>,
    base_cols: Vec<Vec<(u32, TrustTriple)>>,
    /// Columns with at least one in-edge; only these ever move.
    reachable_cols: Vec<u32>,
    state: IterState,
    exponent: u32,
    last_delta: f64,
}

impl PowerIter {
    /// Starts from the adjacency matrix (exponent 1). Does not itself require
    /// acyclicity; [`evaluate`] adds that check.
    pub fn new(g: &TrustGraph, backend: MatrixBackend) -> Self {
        let n = g.node_count();
        let base = TrustMatrix::from_graph(g, MatrixBackend::Sparse);
        let base_rows = base.off_diagonal_rows();
        let base_cols = cols_from_rows(n, &base_rows);
        let reachable_cols = (0..n as u32)
            .filter(|&j| !base_cols[j as usize].is_empty())
            .collect();
        let state = match TrustMatrix::from_graph(g, backend) {
            m if m.is_dense() => IterState::Dense {
                values: m.dense_values().expect("dense backing").to_vec(),
                changed: vec![true; n * n],
            },
            m => IterState::Sparse {
                rows: m.off_diagonal_rows(),
                active: vec![true; n],
            },
        };
        Self {
            n,
            base_rows,
            base_cols,
            reachable_cols,
            state,
            exponent: 1,
            last_delta: 0.0,
        }
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn last_delta(&self) -> f64 {
        self.last_delta
    }

    /// The current iterate as a matrix.
    pub fn matrix(&self) -> TrustMatrix {
        match &self.state {
            IterState::Dense { values, .. } => {
                TrustMatrix::from_dense_values(self.n, values.clone())
            }
            IterState::Sparse { rows, .. } => {
                let mut values = vec![NO_RELATION; self.n * self.n];
                for i in 0..self.n {
                    values[i * self.n + i] = FULL_TRUST;
                }
                for (i, row) in rows.iter().enumerate() {
                    for &(j, v) in row {
                        values[i * self.n + j as usize] = v;
                    }
                }
                TrustMatrix::from_dense_values(self.n, values)
            }
        }
    }

    /// One product with the base matrix.
    pub fn step(&mut self) -> StepStats {
        let n = self.n;
        let visit_all: Option<&[u32]> =
            (self.exponent == 1).then_some(self.reachable_cols.as_slice());
        let stats = match &mut self.state {
            IterState::Dense { values, changed } => {
                let mut next = vec![NO_RELATION; n * n];
                let mut next_changed = vec![false; n * n];
                let (delta, count) = next
                    .par_chunks_mut(n.max(1))
                    .zip(next_changed.par_chunks_mut(n.max(1)))
                    .enumerate()
                    .map_init(
                        || (vec![false; n], Vec::<u32>::new()),
                        |(marks, touched), (i, (next_row, changed_row))| {
                            step_dense_row(
                                i,
                                values,
                                changed,
                                &self.base_rows,
                                &self.base_cols,
                                visit_all,
                                next_row,
                                changed_row,
                                marks,
                                touched,
                            )
                        },
                    )
                    .reduce(|| (0.0f64, 0usize), |a, b| (a.0.max(b.0), a.1 + b.1));
                *values = next;
                *changed = next_changed;
                StepStats {
                    max_delta: delta,
                    changed_pairs: count,
                }
            }
            IterState::Sparse { rows, active } => {
                let results: Vec<SparseRowStep> = (0..n)
                    .into_par_iter()
                    .map_init(
                        || (vec![NO_RELATION; n], Vec::<u32>::new()),
                        |(acc, touched), i| {
                            if !active[i] {
                                return (rows[i].clone(), false, 0.0, 0);
                            }
                            let new_row = crate::matrix::scatter_row_for(
                                i as u32,
                                &rows[i],
                                &self.base_rows,
                                acc,
                                touched,
                            );
                            let (delta, count) = sparse_row_delta(&new_row, &rows[i]);
                            (new_row, count > 0, delta, count)
                        },
                    )
                    .collect();
                let mut delta = 0.0f64;
                let mut count = 0usize;
                for (i, (row, row_changed, d, c)) in results.into_iter().enumerate() {
                    rows[i] = row;
                    active[i] = row_changed;
                    delta = delta.max(d);
                    count += c;
                }
                StepStats {
                    max_delta: delta,
                    changed_pairs: count,
                }
            }
        };
        self.exponent += 1;
        self.last_delta = stats.max_delta;
        stats
    }
}

#[allow(clippy::too_many_arguments)]
fn step_dense_row(
    i: usize,
    values: &[TrustTriple],
    changed: &[bool],
    base_rows: &[Vec<(u32, TrustTriple)>],
    base_cols: &[Vec<(u32, TrustTriple)>],
    visit_all: Option<&[u32]>,
    next_row: &mut [TrustTriple],
    changed_row: &mut [bool],
    marks: &mut [bool],
    touched: &mut Vec<u32>,
) -> (f64, usize) {
    let n = base_rows.len();
    let prev_row = &values[i * n..(i + 1) * n];
    let changed_prev = &changed[i * n..(i + 1) * n];

    let visit: &[u32] = match visit_all {
        Some(all) => all,
        None => {
            // Entries that may move: out-neighbors of any k whose (i,k) changed.
            for (k, k_changed) in changed_prev.iter().enumerate() {
                if *k_changed {
                    for &(j, _) in &base_rows[k] {
                        if !marks[j as usize] {
                            marks[j as usize] = true;
                            touched.push(j);
                        }
                    }
                }
            }
            touched
        }
    };

    let mut delta = 0.0f64;
    let mut count = 0usize;
    next_row.copy_from_slice(prev_row);
    next_row[i] = FULL_TRUST;
    for &j in visit {
        let j = j as usize;
        if j == i {
            continue;
        }
        let mut acc = NO_RELATION;
        for &(k, w) in &base_cols[j] {
            accumulate(&mut acc, prev_row[k as usize], w);
        }
        if acc != prev_row[j] {
            delta = delta.max(acc.component_delta(prev_row[j]));
            count += 1;
            changed_row[j] = true;
        }
        next_row[j] = acc;
    }
    if visit_all.is_none() {
        for &j in touched.iter() {
            marks[j as usize] = false;
        }
        touched.clear();
    }
    (delta, count)
}

/// Componentwise delta between two sorted sparse rows.
fn sparse_row_delta(a: &[(u32, TrustTriple)], b: &[(u32, TrustTriple)]) -> (f64, usize) {
    let mut delta = 0.0f64;
    let mut count = 0usize;
    let (mut x, mut y) = (0usize, 0usize);
    while x < a.len() || y < b.len() {
        let (va, vb, col_a, col_b) = (
            a.get(x).map(|&(c, v)| (c, v)),
            b.get(y).map(|&(c, v)| (c, v)),
            a.get(x).map_or(u32::MAX, |&(c, _)| c),
            b.get(y).map_or(u32::MAX, |&(c, _)| c),
        );
        let (lhs, rhs) = match col_a.cmp(&col_b) {
            std::cmp::Ordering::Less => {
                x += 1;
                (va.unwrap().1, NO_RELATION)
            }
            std::cmp::Ordering::Greater => {
                y += 1;
                (NO_RELATION, vb.unwrap().1)
            }
            std::cmp::Ordering::Equal => {
                x += 1;
                y += 1;
                (va.unwrap().1, vb.unwrap().1)
            }
        };
        if lhs != rhs {
            count += 1;
            delta = delta.max(lhs.component_delta(rhs));
        }
    }
    (delta, count)
}

/// The matrix aggregating all paths of length ≤ `exponent` (the base matrix
/// raised to that power under the modified product).
pub fn power(g: &TrustGraph, exponent: u32, backend: MatrixBackend) -> TrustMatrix {
    assert!(exponent >= 1, "exponent must be at least 1");
    let mut iter = PowerIter::new(g, backend);
    for _ in 1..exponent {
        iter.step();
    }
    iter.matrix()
}

/// Evaluates trust between all pairs of an acyclic graph by power iteration.
///
/// Iterates until two consecutive iterates agree componentwise within
/// `opts.epsilon` (default 0: exact fixpoint, reached at the longest path
/// length) or until `opts.max_iters` products have been taken (default: the
/// node count). Cyclic inputs are refused.
pub fn evaluate(g: &TrustGraph, opts: &EvalOptions) -> Result<EvalReport, EngineError> {
    opts.validate()?;
    if g.topological_order().is_none() {
        return Err(EngineError::CyclicInput);
    }
    let max_iters = opts.max_iters.unwrap_or(g.node_count().max(1) as u32);
    opts.run(|| {
        let mut iter = PowerIter::new(g, opts.backend);
        let mut trace = Vec::new();
        let mut termination = Termination::MaxIters;
        for _ in 0..max_iters {
            let started = Instant::now();
            let stats = iter.step();
            trace.push(IterationStat {
                max_delta: stats.max_delta,
                changed_pairs: stats.changed_pairs,
                seconds: started.elapsed().as_secs_f64(),
            });
            if stats.changed_pairs == 0 {
                termination = Termination::Fixpoint;
                break;
            }
            if opts.epsilon > 0.0 && stats.max_delta <= opts.epsilon {
                termination = Termination::Epsilon;
                break;
            }
        }
        let iterations = trace.len() as u32;
        Ok(EvalReport {
            matrix: iter.matrix(),
            iterations,
            termination,
            approximate: termination != Termination::Fixpoint,
            trace,
            frozen_pairs: Vec::new(),
        })
    })?
}
