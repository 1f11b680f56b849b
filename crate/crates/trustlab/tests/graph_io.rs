//! Round-trip and generation properties of the graph model.

use proptest::prelude::*;

use trustlab::algebra::TrustTriple;
use trustlab::graph::{GraphKind, TrustGraph};

/// A random labeled graph built edge-by-edge (no isolated nodes).
fn arb_graph() -> impl Strategy<Value = TrustGraph> {
    let edge = (0u32..12, 0u32..12, 0.0..=1.0f64, 0.0..=1.0f64);
    prop::collection::vec(edge, 1..40).prop_map(|edges| {
        let mut g = TrustGraph::new();
        for (s, d, u, v) in edges {
            if s == d {
                continue;
            }
            let (td, dtd) = if u + v > 1.0 {
                (1.0 - u, 1.0 - v)
            } else {
                (u, v)
            };
            let Ok(w) = TrustTriple::new(td, dtd) else {
                continue;
            };
            if w.is_no_relation() {
                continue;
            }
            // Duplicate pairs are rejected; keep the first occurrence.
            let _ = g.add_edge(&format!("n{s}"), &format!("n{d}"), w);
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn csv_round_trip(g in arb_graph()) {
        let back = TrustGraph::from_csv_str(&g.to_csv()).unwrap();
        prop_assert!(g.same_labeled_graph(&back));
        // A second pass is byte-stable.
        prop_assert_eq!(g.to_csv(), back.to_csv());
    }

    #[test]
    fn json_round_trip(g in arb_graph()) {
        let back = TrustGraph::from_json_str(&g.to_json()).unwrap();
        prop_assert!(g.same_labeled_graph(&back));
        prop_assert_eq!(g.to_json(), back.to_json());
    }

    #[test]
    fn random_dags_pass_the_acyclicity_check(seed in 0u64..500) {
        let n = 2 + (seed % 11) as usize;
        let max = n * (n - 1) / 2;
        let edges = (seed as usize * 7 + 3) % (max + 1);
        let g = TrustGraph::random(n, edges, GraphKind::ConfirmedAcyclic, seed).unwrap();
        prop_assert_eq!(g.edge_count(), edges);
        prop_assert!(g.is_acyclic());
    }

    #[test]
    fn random_graphs_have_dense_edge_ids(seed in 0u64..200) {
        let g = TrustGraph::random(10, (seed % 60) as usize, GraphKind::General, seed).unwrap();
        for (expect, e) in g.edges().iter().enumerate() {
            let &(_, id) = g
                .out_edges(e.src)
                .iter()
                .find(|&&(dst, _)| dst == e.dst)
                .unwrap();
            prop_assert_eq!(id as usize, expect);
        }
    }
}

#[test]
fn dot_export_mentions_every_edge() {
    let g = TrustGraph::from_csv_str("A,B,0.9,0.05\nB,C,0.8,0.1").unwrap();
    let dot = g.to_dot();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("\"A\" -> \"B\" [label=\"0.9,0.05\"];"));
    assert!(dot.contains("\"B\" -> \"C\" [label=\"0.8,0.1\"];"));
}

#[test]
fn weights_survive_round_trips_bit_exactly() {
    // A weight with no short decimal form.
    let w = TrustTriple::new(1.0 / 3.0, 1.0 / 7.0).unwrap();
    let mut g = TrustGraph::new();
    g.add_edge("A", "B", w).unwrap();
    let csv = TrustGraph::from_csv_str(&g.to_csv()).unwrap();
    let json = TrustGraph::from_json_str(&g.to_json()).unwrap();
    for back in [csv, json] {
        let got = back.weight(0, 1).unwrap();
        assert_eq!(got.td().to_bits(), w.td().to_bits());
        assert_eq!(got.dtd().to_bits(), w.dtd().to_bits());
    }
}
