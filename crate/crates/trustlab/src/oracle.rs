//! Brute-force reference implementations used to validate the engines.
//!
//! Everything here favors being obviously correct over being fast: the
//! recursive evaluator walks predecessor sets directly off the definition of
//! trust evaluation, and the path machinery enumerates or dynamic-programs
//! simple paths outright. General-graph searches are exponential and size
//! guarded.

use std::collections::HashMap;

use crate::algebra::{TrustTriple, FULL_TRUST, NO_RELATION};
use crate::error::EngineError;
use crate::graph::TrustGraph;
use crate::matrix::accumulate;

/// Node cap for the exponential general-graph searches.
pub const EXHAUSTIVE_NODE_LIMIT: usize = 20;

/// All simple paths between one node pair.
#[derive(Debug, Clone)]
pub struct PathSet {
    pub endpoints: (u32, u32),
    /// Node sequences `[a, ..., b]`, in DFS order with ascending neighbor
    /// visits; every path is simple.
    pub paths: Vec<Vec<u32>>,
}

impl PathSet {
    /// Ids of all edges lying on at least one of the paths, ascending.
    pub fn edge_ids(&self, g: &TrustGraph) -> Vec<u32> {
        let mut ids: Vec<u32> = self
            .paths
            .iter()
            .flat_map(|p| {
                p.windows(2).map(|w| {
                    g.out_edges(w[0])
                        .iter()
                        .find(|&&(dst, _)| dst == w[1])
                        .expect("path edge must exist")
                        .1
                })
            })
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn longest_len(&self) -> usize {
        self.paths.iter().map(|p| p.len() - 1).max().unwrap_or(0)
    }
}

/// Trust between `a` and `b` by the right-to-left recursion: parallel
/// aggregation over the predecessors of `b` of (recursively evaluated trust
/// toward the predecessor) . (its edge into `b`), plus the direct edge.
///
/// `depth_cap` limits the path length considered, so `depth_cap = d` yields
/// the aggregation over all paths of length ≤ d. `None` means unbounded
/// (every simple path fits in n − 1 hops). Only acyclic graphs are accepted.
pub fn recursive_eval(
    g: &TrustGraph,
    a: u32,
    b: u32,
    depth_cap: Option<u32>,
) -> Result<TrustTriple, EngineError> {
    check_nodes(g, &[b])?;
    Ok(recursive_eval_from(g, a, depth_cap)?[b as usize])
}

/// [`recursive_eval`] toward every node at once, sharing one memo table.
pub fn recursive_eval_from(
    g: &TrustGraph,
    a: u32,
    depth_cap: Option<u32>,
) -> Result<Vec<TrustTriple>, EngineError> {
    let n = g.node_count();
    check_nodes(g, &[a])?;
    if g.topological_order().is_none() {
        return Err(EngineError::CyclicInput);
    }
    let depth = depth_cap.unwrap_or(n.saturating_sub(1) as u32);
    let mut memo: HashMap<(u32, u32), TrustTriple> = HashMap::new();
    Ok((0..n as u32)
        .map(|b| eval_rec(g, a, b, depth, &mut memo))
        .collect())
}

fn eval_rec(
    g: &TrustGraph,
    a: u32,
    b: u32,
    depth: u32,
    memo: &mut HashMap<(u32, u32), TrustTriple>,
) -> TrustTriple {
    if b == a {
        return FULL_TRUST;
    }
    if depth == 0 {
        return NO_RELATION;
    }
    if let Some(&v) = memo.get(&(b, depth)) {
        return v;
    }
    let mut acc = NO_RELATION;
    // Predecessors ascending; the p = a case is the direct edge (full trust
    // toward oneself times the edge weight).
    for &(p, edge_id) in g.in_edges(b) {
        let toward_p = eval_rec(g, a, p, depth - 1, memo);
        accumulate(&mut acc, toward_p, g.edge(edge_id).weight);
    }
    memo.insert((b, depth), acc);
    acc
}

/// Length of the longest simple path from `a` to `b`, 0 when none exists.
///
/// Acyclic graphs use the predecessor recursion over a topological order;
/// general graphs fall back to a subset dynamic program and are capped at
/// [`EXHAUSTIVE_NODE_LIMIT`] nodes.
pub fn longest_path(g: &TrustGraph, a: u32, b: u32) -> Result<u32, EngineError> {
    check_nodes(g, &[a, b])?;
    if let Some(order) = g.topological_order() {
        return Ok(dag_longest_from(g, a, &order)[b as usize].unwrap_or(0));
    }
    let reach = simple_path_reach(g, a)?;
    let mut best = 0u32;
    for (mask, ends) in reach.iter().enumerate() {
        if ends & (1 << b) != 0 {
            best = best.max(mask.count_ones() - 1);
        }
    }
    Ok(best)
}

/// Longest simple path between any ordered pair (the graph-wide fixpoint
/// exponent bound for acyclic graphs).
pub fn longest_path_overall(g: &TrustGraph) -> Result<u32, EngineError> {
    let n = g.node_count();
    if n == 0 {
        return Ok(0);
    }
    if let Some(order) = g.topological_order() {
        let mut best = 0;
        for a in 0..n as u32 {
            let dist = dag_longest_from(g, a, &order);
            best = dist.iter().flatten().copied().fold(best, u32::max);
        }
        return Ok(best);
    }
    let mut best = 0u32;
    for a in 0..n as u32 {
        let reach = simple_path_reach(g, a)?;
        for (mask, ends) in reach.iter().enumerate() {
            if *ends != 0 {
                best = best.max(mask.count_ones() - 1);
            }
        }
    }
    Ok(best)
}

/// Longest-path lengths from `a` to every node along a topological order;
/// `None` marks unreachable nodes.
fn dag_longest_from(g: &TrustGraph, a: u32, order: &[u32]) -> Vec<Option<u32>> {
    let mut dist: Vec<Option<u32>> = vec![None; g.node_count()];
    dist[a as usize] = Some(0);
    for &v in order {
        let Some(dv) = dist[v as usize] else { continue };
        for &(w, _) in g.out_edges(v) {
            let dw = dist[w as usize].get_or_insert(0);
            *dw = (*dw).max(dv + 1);
        }
    }
    dist[a as usize] = Some(0);
    dist
}

/// Subset DP: for every node mask containing `a`, the set (as a bitmask) of
/// endpoints v reachable by a simple path from `a` covering exactly that mask.
fn simple_path_reach(g: &TrustGraph, a: u32) -> Result<Vec<u32>, EngineError> {
    let n = g.node_count();
    if n > EXHAUSTIVE_NODE_LIMIT {
        return Err(EngineError::TooLarge {
            n,
            max: EXHAUSTIVE_NODE_LIMIT,
        });
    }
    let adj: Vec<u32> = (0..n as u32)
        .map(|v| g.out_edges(v).iter().fold(0u32, |m, &(w, _)| m | (1 << w)))
        .collect();
    let mut reach = vec![0u32; 1 << n];
    reach[1 << a] = 1 << a;
    for mask in 0..(1usize << n) {
        let mut ends = reach[mask];
        while ends != 0 {
            let v = ends.trailing_zeros();
            ends &= ends - 1;
            let mut nexts = adj[v as usize] & !(mask as u32);
            while nexts != 0 {
                let w = nexts.trailing_zeros();
                nexts &= nexts - 1;
                reach[mask | (1 << w)] |= 1 << w;
            }
        }
    }
    Ok(reach)
}

/// All simple paths from `a` to `b` of length ≤ `max_len`, in deterministic
/// DFS order (ascending successor index). Size guarded.
pub fn enumerate_simple_paths(
    g: &TrustGraph,
    a: u32,
    b: u32,
    max_len: u32,
) -> Result<PathSet, EngineError> {
    let n = g.node_count();
    check_nodes(g, &[a, b])?;
    if n > EXHAUSTIVE_NODE_LIMIT {
        return Err(EngineError::TooLarge {
            n,
            max: EXHAUSTIVE_NODE_LIMIT,
        });
    }
    let mut paths = Vec::new();
    if a != b && max_len > 0 {
        let mut visited = vec![false; n];
        let mut stack = vec![a];
        visited[a as usize] = true;
        dfs_paths(g, b, max_len, &mut stack, &mut visited, &mut paths);
    }
    Ok(PathSet {
        endpoints: (a, b),
        paths,
    })
}

fn dfs_paths(
    g: &TrustGraph,
    b: u32,
    max_len: u32,
    stack: &mut Vec<u32>,
    visited: &mut [bool],
    out: &mut Vec<Vec<u32>>,
) {
    let v = *stack.last().unwrap();
    if v == b {
        out.push(stack.clone());
        return;
    }
    if stack.len() as u32 > max_len {
        return;
    }
    for &(w, _) in g.out_edges(v) {
        if !visited[w as usize] {
            visited[w as usize] = true;
            stack.push(w);
            dfs_paths(g, b, max_len, stack, visited, out);
            stack.pop();
            visited[w as usize] = false;
        }
    }
}

/// Edges lying on at least one walk from `a` to `b`: those whose source is
/// reachable from `a` and whose target reaches `b`. On acyclic graphs this
/// coincides with "on some simple path"; with cycles it is the honest upper
/// envelope of what repeated traversals can touch.
pub fn edges_on_walks(g: &TrustGraph, a: u32, b: u32) -> Result<Vec<u32>, EngineError> {
    check_nodes(g, &[a, b])?;
    let n = g.node_count();
    let mut fwd = vec![false; n];
    let mut stack = vec![a];
    fwd[a as usize] = true;
    while let Some(v) = stack.pop() {
        for &(w, _) in g.out_edges(v) {
            if !fwd[w as usize] {
                fwd[w as usize] = true;
                stack.push(w);
            }
        }
    }
    let mut back = vec![false; n];
    let mut stack = vec![b];
    back[b as usize] = true;
    while let Some(v) = stack.pop() {
        for &(w, _) in g.in_edges(v) {
            if !back[w as usize] {
                back[w as usize] = true;
                stack.push(w);
            }
        }
    }
    Ok(g.edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| fwd[e.src as usize] && back[e.dst as usize])
        .map(|(id, _)| id as u32)
        .collect())
}

fn check_nodes(g: &TrustGraph, nodes: &[u32]) -> Result<(), EngineError> {
    for &v in nodes {
        if v as usize >= g.node_count() {
            return Err(EngineError::NodeOutOfRange {
                index: v,
                n: g.node_count(),
            });
        }
    }
    Ok(())
}
