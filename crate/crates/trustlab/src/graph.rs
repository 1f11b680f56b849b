//! Directed trust graphs: node registry, edge list, ingestion and export,
//! and seeded random instance generation.
//!
//! Nodes carry external string ids and are numbered densely in
//! first-appearance order; edges are numbered densely 0..φ−1 in insertion
//! order. A stored edge weight is never ⟨0,0,1⟩ — a fully uncertain
//! relationship is simply a missing edge — and self-loops are rejected
//! because self-trust is implicit and always full.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, TrustTriple};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: self-loop on node {id:?} (self-trust is implicit)")]
    SelfLoop { line: usize, id: String },
    #[error("line {line}: duplicate edge {src:?} -> {dst:?}")]
    DuplicateEdge {
        line: usize,
        src: String,
        dst: String,
    },
    #[error("line {line}: invalid trust weight: {source}")]
    BadWeight {
        line: usize,
        #[source]
        source: AlgebraError,
    },
    #[error("line {line}: expected `src,dst,td,dtd`, got {content:?}")]
    MalformedLine { line: usize, content: String },
    #[error("a ⟨0,0,1⟩ weight means no relationship; omit the edge {src:?} -> {dst:?} instead")]
    NoRelationEdge { src: String, dst: String },
    #[error("node id {0:?} is empty or contains a separator character")]
    InvalidNodeId(String),
    #[error("{requested} edges requested but at most {max} are possible")]
    InfeasibleEdgeCount { requested: usize, max: usize },
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),
    #[error("i/o error reading edge list")]
    Io(#[from] std::io::Error),
    #[error("invalid graph json")]
    Json(#[from] serde_json::Error),
}

/// What a random instance is allowed to look like.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// Generated around a random topological order; guaranteed acyclic.
    ConfirmedAcyclic,
    /// Arbitrary directed graph; cycles permitted (not forced).
    General,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: u32,
    pub dst: u32,
    pub weight: TrustTriple,
}

/// An immutable-after-construction directed graph with trust-triple weights.
#[derive(Debug, Clone, Default)]
pub struct TrustGraph {
    ids: Vec<String>,
    index: HashMap<String, u32>,
    edges: Vec<Edge>,
    /// Per node, outgoing (dst, edge id) sorted by dst.
    out: Vec<Vec<(u32, u32)>>,
    /// Per node, incoming (src, edge id) sorted by src.
    inc: Vec<Vec<(u32, u32)>>,
}

impl TrustGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    /// Number of edges φ.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_id(&self, index: u32) -> &str {
        &self.ids[index as usize]
    }

    pub fn node_index(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, edge_id: u32) -> &Edge {
        &self.edges[edge_id as usize]
    }

    /// Outgoing (dst, edge id) pairs of `node`, ascending by dst.
    pub fn out_edges(&self, node: u32) -> &[(u32, u32)] {
        &self.out[node as usize]
    }

    /// Incoming (src, edge id) pairs of `node`, ascending by src.
    pub fn in_edges(&self, node: u32) -> &[(u32, u32)] {
        &self.inc[node as usize]
    }

    pub fn weight(&self, src: u32, dst: u32) -> Option<TrustTriple> {
        let row = &self.out[src as usize];
        row.binary_search_by_key(&dst, |&(d, _)| d)
            .ok()
            .map(|pos| self.edges[row[pos].1 as usize].weight)
    }

    /// Registers a node id, returning its dense index. Existing ids are
    /// returned as-is, so insertion order fixes the numbering.
    pub fn add_node(&mut self, id: &str) -> Result<u32, GraphError> {
        if let Some(&i) = self.index.get(id) {
            return Ok(i);
        }
        if id.is_empty() || id.contains([',', '\n', '\r']) || id.trim() != id {
            return Err(GraphError::InvalidNodeId(id.to_owned()));
        }
        let i = self.ids.len() as u32;
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), i);
        self.out.push(Vec::new());
        self.inc.push(Vec::new());
        Ok(i)
    }

    /// Adds an edge between existing-or-new nodes named by id.
    pub fn add_edge(
        &mut self,
        src: &str,
        dst: &str,
        weight: TrustTriple,
    ) -> Result<u32, GraphError> {
        self.add_edge_at_line(src, dst, weight, 0)
    }

    fn add_edge_at_line(
        &mut self,
        src: &str,
        dst: &str,
        weight: TrustTriple,
        line: usize,
    ) -> Result<u32, GraphError> {
        if src == dst {
            return Err(GraphError::SelfLoop {
                line,
                id: src.to_owned(),
            });
        }
        if weight.is_no_relation() {
            return Err(GraphError::NoRelationEdge {
                src: src.to_owned(),
                dst: dst.to_owned(),
            });
        }
        let s = self.add_node(src)?;
        let d = self.add_node(dst)?;
        let row = &mut self.out[s as usize];
        let pos = match row.binary_search_by_key(&d, |&(x, _)| x) {
            Ok(_) => {
                return Err(GraphError::DuplicateEdge {
                    line,
                    src: src.to_owned(),
                    dst: dst.to_owned(),
                })
            }
            Err(pos) => pos,
        };
        let edge_id = self.edges.len() as u32;
        row.insert(pos, (d, edge_id));
        let col = &mut self.inc[d as usize];
        let pos = col.binary_search_by_key(&s, |&(x, _)| x).unwrap_err();
        col.insert(pos, (s, edge_id));
        self.edges.push(Edge {
            src: s,
            dst: d,
            weight,
        });
        Ok(edge_id)
    }

    /// Returns a topological order if the graph is acyclic, `None` otherwise.
    ///
    /// Kahn's algorithm with a FIFO seeded in index order, so the returned
    /// order is deterministic.
    pub fn topological_order(&self) -> Option<Vec<u32>> {
        let n = self.node_count();
        let mut indegree: Vec<u32> = vec![0; n];
        for e in &self.edges {
            indegree[e.dst as usize] += 1;
        }
        let mut queue: std::collections::VecDeque<u32> = (0..n as u32)
            .filter(|&v| indegree[v as usize] == 0)
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in self.out_edges(v) {
                indegree[w as usize] -= 1;
                if indegree[w as usize] == 0 {
                    queue.push_back(w);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Deterministic random instance with exactly `edge_count` edges.
    ///
    /// Weights are uniform over the simplex td + dtd ≤ 1. For
    /// [`GraphKind::ConfirmedAcyclic`] a random permutation is drawn as the
    /// topological order and edges only ever point forward along it.
    pub fn random(
        n: usize,
        edge_count: usize,
        kind: GraphKind,
        seed: u64,
    ) -> Result<Self, GraphError> {
        let max = match kind {
            GraphKind::General => n.saturating_mul(n.saturating_sub(1)),
            GraphKind::ConfirmedAcyclic => n.saturating_mul(n.saturating_sub(1)) / 2,
        };
        if edge_count > max {
            return Err(GraphError::InfeasibleEdgeCount {
                requested: edge_count,
                max,
            });
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut g = Self::new();
        let width = (n.saturating_sub(1)).to_string().len();
        let mut name = String::new();
        for v in 0..n {
            name.clear();
            write!(name, "v{v:0width$}").unwrap();
            g.add_node(&name)?;
        }

        let mut taken: std::collections::HashSet<(u32, u32)> =
            std::collections::HashSet::with_capacity(edge_count * 2);
        match kind {
            GraphKind::General => {
                while taken.len() < edge_count {
                    let s = rng.random_range(0..n as u32);
                    let d = rng.random_range(0..n as u32);
                    if s == d || !taken.insert((s, d)) {
                        continue;
                    }
                    let w = random_weight(&mut rng);
                    g.add_edge(
                        g.ids[s as usize].clone().as_str(),
                        &g.ids[d as usize].clone(),
                        w,
                    )?;
                }
            }
            GraphKind::ConfirmedAcyclic => {
                // Random topological order, then forward edges along it.
                let mut perm: Vec<u32> = (0..n as u32).collect();
                for i in (1..n).rev() {
                    let j = rng.random_range(0..=i);
                    perm.swap(i, j);
                }
                while taken.len() < edge_count {
                    let a = rng.random_range(0..n as u32);
                    let b = rng.random_range(0..n as u32);
                    if a == b {
                        continue;
                    }
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    let (s, d) = (perm[lo as usize], perm[hi as usize]);
                    if !taken.insert((s, d)) {
                        continue;
                    }
                    let w = random_weight(&mut rng);
                    g.add_edge(
                        g.ids[s as usize].clone().as_str(),
                        &g.ids[d as usize].clone(),
                        w,
                    )?;
                }
            }
        }
        Ok(g)
    }

    /// The 4-node one-cycle demonstration graph
    /// `1 → 2 → 3 → 4 → 2` with the given weights on a, b, c, d.
    pub fn one_cycle_demo(a: TrustTriple, b: TrustTriple, c: TrustTriple, d: TrustTriple) -> Self {
        let mut g = Self::new();
        g.add_edge("1", "2", a).unwrap();
        g.add_edge("2", "3", b).unwrap();
        g.add_edge("3", "4", c).unwrap();
        g.add_edge("4", "2", d).unwrap();
        g
    }

    /// Parses a CSV edge list: lines of `src,dst,td,dtd`, UTF-8, `\n` line
    /// ends; `#` comments, blank lines and one optional header are skipped.
    pub fn from_csv_reader(reader: impl BufRead) -> Result<Self, GraphError> {
        let mut g = Self::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let content = line.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            if lineno == 1 && content == "src,dst,td,dtd" {
                continue;
            }
            g.parse_csv_line(content, lineno)?;
        }
        Ok(g)
    }

    pub fn from_csv_str(s: &str) -> Result<Self, GraphError> {
        Self::from_csv_reader(s.as_bytes())
    }

    fn parse_csv_line(&mut self, content: &str, lineno: usize) -> Result<(), GraphError> {
        let malformed = || GraphError::MalformedLine {
            line: lineno,
            content: content.to_owned(),
        };
        let mut fields = content.split(',');
        let src = fields.next().ok_or_else(malformed)?.trim();
        let dst = fields.next().ok_or_else(malformed)?.trim();
        let rest: Vec<&str> = fields.collect();
        if src.is_empty() || dst.is_empty() || !(rest.len() == 2 || rest.len() == 3) {
            return Err(malformed());
        }
        let weight =
            TrustTriple::from_str(&rest.join(",")).map_err(|source| GraphError::BadWeight {
                line: lineno,
                source,
            })?;
        self.add_edge_at_line(src, dst, weight, lineno)?;
        Ok(())
    }

    /// CSV edge list with header; edges in id order. Weights use the shortest
    /// decimal form that parses back to the same float, so a load/export
    /// round trip is bit-exact. Isolated nodes are not representable in this
    /// format — use JSON when they matter.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("src,dst,td,dtd\n");
        for e in &self.edges {
            writeln!(
                s,
                "{},{},{}",
                self.node_id(e.src),
                self.node_id(e.dst),
                e.weight
            )
            .unwrap();
        }
        s
    }

    pub fn to_json(&self) -> String {
        let doc = JsonGraph {
            nodes: self.ids.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| JsonEdge {
                    src: self.node_id(e.src).to_owned(),
                    dst: self.node_id(e.dst).to_owned(),
                    td: e.weight.td(),
                    dtd: e.weight.dtd(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("graph json serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self, GraphError> {
        let doc: JsonGraph = serde_json::from_str(s)?;
        let mut g = Self::new();
        for id in &doc.nodes {
            let before = g.node_count();
            let idx = g.add_node(id)?;
            if (idx as usize) < before {
                return Err(GraphError::DuplicateNode(id.clone()));
            }
        }
        for (i, e) in doc.edges.iter().enumerate() {
            let weight = TrustTriple::new(e.td, e.dtd).map_err(|source| GraphError::BadWeight {
                line: i + 1,
                source,
            })?;
            g.add_edge_at_line(&e.src, &e.dst, weight, i + 1)?;
        }
        Ok(g)
    }

    /// GraphViz form with weights as edge labels.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph trust {\n");
        for id in &self.ids {
            writeln!(s, "  {:?};", id).unwrap();
        }
        for e in &self.edges {
            writeln!(
                s,
                "  {:?} -> {:?} [label=\"{}\"];",
                self.node_id(e.src),
                self.node_id(e.dst),
                e.weight
            )
            .unwrap();
        }
        s.push_str("}\n");
        s
    }

    pub fn export(&self, format: GraphFormat) -> String {
        match format {
            GraphFormat::Csv => self.to_csv(),
            GraphFormat::Json => self.to_json(),
            GraphFormat::Dot => self.to_dot(),
        }
    }

    /// Same node-id set and same (src, dst, weight) edge set, compared by
    /// external ids with bit-exact weights. Indices and edge numbering may
    /// differ.
    pub fn same_labeled_graph(&self, other: &Self) -> bool {
        if self.node_count() != other.node_count() || self.edge_count() != other.edge_count() {
            return false;
        }
        if self.ids.iter().any(|id| other.node_index(id).is_none()) {
            return false;
        }
        self.edges.iter().all(|e| {
            let (Some(s), Some(d)) = (
                other.node_index(self.node_id(e.src)),
                other.node_index(self.node_id(e.dst)),
            ) else {
                return false;
            };
            other.weight(s, d) == Some(e.weight)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Csv,
    Json,
    Dot,
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    nodes: Vec<String>,
    edges: Vec<JsonEdge>,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    src: String,
    dst: String,
    td: f64,
    dtd: f64,
}

/// Uniform draw from {(td, dtd) : td, dtd ≥ 0, td + dtd ≤ 1}, excluding the
/// ⟨0,0,1⟩ corner (which would be a non-edge).
fn random_weight(rng: &mut impl Rng) -> TrustTriple {
    loop {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let (td, dtd) = if u + v > 1.0 {
            (1.0 - u, 1.0 - v)
        } else {
            (u, v)
        };
        let w = TrustTriple::raw(td, dtd);
        if !w.is_no_relation() {
            return w;
        }
    }
}
