//! Trust matrices and their modified product.
//!
//! A [`TrustMatrix`] is an n×n array over trust triples whose diagonal is
//! pinned to [`FULL_TRUST`] and whose absent entries read as
//! [`NO_RELATION`]. The product differs from an ordinary semiring matmul in
//! two ways: the accumulation over k excludes k = j (the direct edge already
//! enters through k = i, and counting it twice would be wrong), and terms
//! equal to ⟨0,0,1⟩ are skipped rather than folded in, because parallel
//! aggregation with ⟨0,0,1⟩ is not neutral — it would erase accumulated
//! distrust.
//!
//! Two backings exist: dense row-major storage and per-row sorted lists of
//! off-diagonal entries. Both visit k in ascending order, so their results
//! are bit-identical.

use rayon::prelude::*;

use crate::algebra::{TrustTriple, FULL_TRUST, NO_RELATION};
use crate::error::EngineError;
use crate::graph::TrustGraph;

/// Storage strategy for a trust matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixBackend {
    /// Dense when the graph density φ/n² exceeds 1/4, sparse otherwise.
    #[default]
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone)]
enum Backing {
    /// Row-major n×n values; diagonal entries stored as FULL_TRUST.
    Dense(Vec<TrustTriple>),
    /// Per-row (col, value) lists sorted by col; off-diagonal entries only.
    Sparse(Vec<Vec<(u32, TrustTriple)>>),
}

#[derive(Debug, Clone)]
pub struct TrustMatrix {
    n: usize,
    backing: Backing,
}

/// Shared accumulation step of the modified product: fold
/// `t = a . w` into `acc` by parallel aggregation, skipping ⟨0,0,1⟩ terms.
/// Every backend and engine goes through this one function so that results
/// are bit-identical regardless of storage or scheduling. Returns whether the
/// term was folded in.
#[inline]
pub(crate) fn accumulate_checked(acc: &mut TrustTriple, a: TrustTriple, w: TrustTriple) -> bool {
    if a.is_no_relation() {
        return false;
    }
    let t = a.seq(w);
    if t.is_no_relation() {
        return false;
    }
    *acc = if acc.is_no_relation() { t } else { acc.par(t) };
    true
}

#[inline]
pub(crate) fn accumulate(acc: &mut TrustTriple, a: TrustTriple, w: TrustTriple) {
    accumulate_checked(acc, a, w);
}

impl TrustMatrix {
    /// Adjacency matrix of `g`: off-diagonal entries are the edge weights,
    /// missing edges read ⟨0,0,1⟩, the diagonal is full trust.
    pub fn from_graph(g: &TrustGraph, backend: MatrixBackend) -> Self {
        let n = g.node_count();
        match resolve_backend(backend, n, g.edge_count()) {
            MatrixBackend::Sparse => {
                let mut rows: Vec<Vec<(u32, TrustTriple)>> = vec![Vec::new(); n];
                for (i, row) in rows.iter_mut().enumerate() {
                    row.extend(
                        g.out_edges(i as u32)
                            .iter()
                            .map(|&(dst, id)| (dst, g.edge(id).weight)),
                    );
                }
                Self {
                    n,
                    backing: Backing::Sparse(rows),
                }
            }
            _ => {
                let mut values = vec![NO_RELATION; n * n];
                for i in 0..n {
                    values[i * n + i] = FULL_TRUST;
                }
                for e in g.edges() {
                    values[e.src as usize * n + e.dst as usize] = e.weight;
                }
                Self {
                    n,
                    backing: Backing::Dense(values),
                }
            }
        }
    }

    /// The identity-like matrix: full trust on the diagonal, no relation
    /// elsewhere.
    pub fn identity(n: usize, backend: MatrixBackend) -> Self {
        match resolve_backend(backend, n, 0) {
            MatrixBackend::Dense => {
                let mut values = vec![NO_RELATION; n * n];
                for i in 0..n {
                    values[i * n + i] = FULL_TRUST;
                }
                Self {
                    n,
                    backing: Backing::Dense(values),
                }
            }
            _ => Self {
                n,
                backing: Backing::Sparse(vec![Vec::new(); n]),
            },
        }
    }

    pub(crate) fn from_dense_values(n: usize, values: Vec<TrustTriple>) -> Self {
        debug_assert_eq!(values.len(), n * n);
        Self {
            n,
            backing: Backing::Dense(values),
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.backing, Backing::Dense(_))
    }

    pub fn get(&self, i: u32, j: u32) -> TrustTriple {
        let (i, j) = (i as usize, j as usize);
        assert!(i < self.n && j < self.n, "index ({i},{j}) out of range");
        if i == j {
            return FULL_TRUST;
        }
        match &self.backing {
            Backing::Dense(values) => values[i * self.n + j],
            Backing::Sparse(rows) => rows[i]
                .binary_search_by_key(&(j as u32), |&(c, _)| c)
                .map(|pos| rows[i][pos].1)
                .unwrap_or(NO_RELATION),
        }
    }

    /// Off-diagonal entries different from ⟨0,0,1⟩, ascending by (row, col).
    pub fn nonzero_pairs(&self) -> Vec<(u32, u32, TrustTriple)> {
        let mut out = Vec::new();
        match &self.backing {
            Backing::Dense(values) => {
                for i in 0..self.n {
                    for j in 0..self.n {
                        let v = values[i * self.n + j];
                        if i != j && !v.is_no_relation() {
                            out.push((i as u32, j as u32, v));
                        }
                    }
                }
            }
            Backing::Sparse(rows) => {
                for (i, row) in rows.iter().enumerate() {
                    out.extend(row.iter().map(|&(j, v)| (i as u32, j, v)));
                }
            }
        }
        out
    }

    /// Largest componentwise |Δ| over all entries.
    pub fn max_delta(&self, other: &Self) -> Result<f64, EngineError> {
        if self.n != other.n {
            return Err(EngineError::OrderMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let mut worst = 0.0f64;
        for i in 0..self.n as u32 {
            for j in 0..self.n as u32 {
                worst = worst.max(self.get(i, j).component_delta(other.get(i, j)));
            }
        }
        Ok(worst)
    }

    /// Componentwise equality within `eps` (0 for exact).
    pub fn approx_eq(&self, other: &Self, eps: f64) -> bool {
        self.max_delta(other).map(|d| d <= eps).unwrap_or(false)
    }

    /// The modified matrix product. Entry (i,j), i ≠ j, parallel-aggregates
    /// `self[i][k] . rhs[k][j]` over k ≠ j in ascending k order; the diagonal
    /// of the result is full trust. The output keeps `self`'s backing.
    pub fn product(&self, rhs: &Self) -> Result<Self, EngineError> {
        if self.n != rhs.n {
            return Err(EngineError::OrderMismatch {
                left: self.n,
                right: rhs.n,
            });
        }
        let rhs_rows = rhs.off_diagonal_rows();
        Ok(match &self.backing {
            Backing::Dense(values) => {
                let cols = cols_from_rows(self.n, &rhs_rows);
                Self {
                    n: self.n,
                    backing: Backing::Dense(product_dense(self.n, values, &cols)),
                }
            }
            Backing::Sparse(rows) => Self {
                n: self.n,
                backing: Backing::Sparse(product_sparse(self.n, rows, &rhs_rows)),
            },
        })
    }

    /// Per-row off-diagonal nonzero entries, ascending by column.
    pub(crate) fn off_diagonal_rows(&self) -> Vec<Vec<(u32, TrustTriple)>> {
        match &self.backing {
            Backing::Sparse(rows) => rows.clone(),
            Backing::Dense(values) => (0..self.n)
                .map(|i| {
                    (0..self.n)
                        .filter(|&j| j != i)
                        .filter_map(|j| {
                            let v = values[i * self.n + j];
                            (!v.is_no_relation()).then_some((j as u32, v))
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub(crate) fn dense_values(&self) -> Option<&[TrustTriple]> {
        match &self.backing {
            Backing::Dense(values) => Some(values),
            Backing::Sparse(_) => None,
        }
    }

    /// Copies into dense storage (used when a caller needs O(1) reads).
    pub fn to_dense(&self) -> Self {
        match &self.backing {
            Backing::Dense(_) => self.clone(),
            Backing::Sparse(rows) => {
                let mut values = vec![NO_RELATION; self.n * self.n];
                for i in 0..self.n {
                    values[i * self.n + i] = FULL_TRUST;
                }
                for (i, row) in rows.iter().enumerate() {
                    for &(j, v) in row {
                        values[i * self.n + j as usize] = v;
                    }
                }
                Self {
                    n: self.n,
                    backing: Backing::Dense(values),
                }
            }
        }
    }
}

impl PartialEq for TrustMatrix {
    /// Value equality across backings (exact componentwise comparison).
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.approx_eq(other, 0.0)
    }
}

fn resolve_backend(backend: MatrixBackend, n: usize, edges: usize) -> MatrixBackend {
    match backend {
        MatrixBackend::Auto => {
            if n == 0 || edges as f64 / (n as f64 * n as f64) > 0.25 {
                MatrixBackend::Dense
            } else {
                MatrixBackend::Sparse
            }
        }
        fixed => fixed,
    }
}

/// Column lists (k, value) ascending by k, built from off-diagonal rows.
pub(crate) fn cols_from_rows(
    n: usize,
    rows: &[Vec<(u32, TrustTriple)>],
) -> Vec<Vec<(u32, TrustTriple)>> {
    let mut cols: Vec<Vec<(u32, TrustTriple)>> = vec![Vec::new(); n];
    for (k, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            cols[j as usize].push((k as u32, v));
        }
    }
    cols
}

fn product_dense(
    n: usize,
    lhs: &[TrustTriple],
    rhs_cols: &[Vec<(u32, TrustTriple)>],
) -> Vec<TrustTriple> {
    let mut out = vec![NO_RELATION; n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(i, out_row)| {
        let lhs_row = &lhs[i * n..(i + 1) * n];
        for (j, slot) in out_row.iter_mut().enumerate() {
            if j == i {
                *slot = FULL_TRUST;
                continue;
            }
            let mut acc = NO_RELATION;
            for &(k, w) in &rhs_cols[j] {
                accumulate(&mut acc, lhs_row[k as usize], w);
            }
            *slot = acc;
        }
    });
    out
}

fn product_sparse(
    n: usize,
    lhs_rows: &[Vec<(u32, TrustTriple)>],
    rhs_rows: &[Vec<(u32, TrustTriple)>],
) -> Vec<Vec<(u32, TrustTriple)>> {
    let rows: Vec<Vec<(u32, TrustTriple)>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![NO_RELATION; n], Vec::<u32>::new()),
            |(acc, touched), i| scatter_row_for(i as u32, &lhs_rows[i], rhs_rows, acc, touched),
        )
        .collect();
    rows
}

/// One output row of the sparse product: scatter row i of the left factor
/// (plus its implicit diagonal) through the rows of the right factor.
/// Visiting k in ascending order makes each output entry's fold identical to
/// the dense column walk.
pub(crate) fn scatter_row_for(
    i: u32,
    lhs_row: &[(u32, TrustTriple)],
    rhs_rows: &[Vec<(u32, TrustTriple)>],
    acc: &mut [TrustTriple],
    touched: &mut Vec<u32>,
) -> Vec<(u32, TrustTriple)> {
    let mut diag_emitted = false;
    let scan = |k: u32, a: TrustTriple, acc: &mut [TrustTriple], touched: &mut Vec<u32>| {
        for &(j, w) in &rhs_rows[k as usize] {
            if j == i {
                continue;
            }
            let slot = &mut acc[j as usize];
            if slot.is_no_relation() {
                // May already be touched if an earlier fold underflowed to
                // ⟨0,0,1⟩; the sort/dedup below tolerates duplicates.
                touched.push(j);
            }
            accumulate(slot, a, w);
        }
    };
    for &(k, a) in lhs_row {
        if !diag_emitted && k > i {
            scan(i, FULL_TRUST, acc, touched);
            diag_emitted = true;
        }
        scan(k, a, acc, touched);
    }
    if !diag_emitted {
        scan(i, FULL_TRUST, acc, touched);
    }
    touched.sort_unstable();
    touched.dedup();
    let row: Vec<(u32, TrustTriple)> = touched
        .iter()
        .filter_map(|&j| {
            let v = acc[j as usize];
            (!v.is_no_relation()).then_some((j, v))
        })
        .collect();
    for &j in touched.iter() {
        acc[j as usize] = NO_RELATION;
    }
    touched.clear();
    row
}
