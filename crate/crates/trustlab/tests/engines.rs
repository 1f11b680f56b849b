//! Cross-checks between the two engines and the brute-force references.

use trustlab::algebra::TrustTriple;
use trustlab::cyclic::{self, CyclicEval};
use trustlab::dag;
use trustlab::graph::{GraphKind, TrustGraph};
use trustlab::matrix::MatrixBackend;
use trustlab::oracle;
use trustlab::report::{EvalOptions, JsonReport, Termination};

fn t(td: f64, dtd: f64) -> TrustTriple {
    TrustTriple::new(td, dtd).unwrap()
}

fn random_dag(seed: u64, max_n: usize) -> TrustGraph {
    let n = 2 + (seed as usize % (max_n - 1));
    let max_edges = n * (n - 1) / 2;
    let edges = (seed as usize).wrapping_mul(2654435761) % (max_edges + 1);
    TrustGraph::random(n, edges, GraphKind::ConfirmedAcyclic, seed).unwrap()
}

#[test]
fn dag_engine_matches_the_recursive_reference() {
    for seed in 0..40u64 {
        let g = random_dag(seed, 10);
        let n = g.node_count() as u32;
        let report = dag::evaluate(&g, &EvalOptions::default()).unwrap();
        for a in 0..n {
            let reference = oracle::recursive_eval_from(&g, a, None).unwrap();
            for b in 0..n {
                let got = report.matrix.get(a, b);
                assert!(
                    got.approx_eq(reference[b as usize], 1e-12),
                    "seed {seed} pair ({a},{b}): {got} vs {}",
                    reference[b as usize]
                );
            }
        }
    }
}

#[test]
fn depth_capped_reference_reproduces_every_power() {
    for seed in 0..25u64 {
        let g = random_dag(seed, 9);
        let n = g.node_count() as u32;
        let longest = oracle::longest_path_overall(&g).unwrap().max(1);
        for d in 1..=longest {
            let m = dag::power(&g, d, MatrixBackend::Dense);
            for a in 0..n {
                let reference = oracle::recursive_eval_from(&g, a, Some(d)).unwrap();
                for b in 0..n {
                    let (x, y) = (m.get(a, b), reference[b as usize]);
                    assert_eq!(
                        (x.td().to_bits(), x.dtd().to_bits()),
                        (y.td().to_bits(), y.dtd().to_bits()),
                        "seed {seed} depth {d} pair ({a},{b})"
                    );
                }
            }
        }
    }
}

#[test]
fn powers_fix_exactly_at_the_longest_path() {
    for seed in 0..40u64 {
        let g = random_dag(seed, 10);
        let longest = oracle::longest_path_overall(&g).unwrap().max(1);
        let fixed = dag::power(&g, longest, MatrixBackend::Auto);
        let beyond = dag::power(&g, longest + 1, MatrixBackend::Auto);
        assert_eq!(fixed, beyond, "seed {seed} moved past exponent {longest}");
        let report = dag::evaluate(&g, &EvalOptions::default()).unwrap();
        assert!(
            report.iterations <= longest.max(1),
            "seed {seed}: {} iterations for longest path {longest}",
            report.iterations
        );
        assert_eq!(report.matrix, fixed);
    }
}

/// Node-disjoint parallel chains between one source and one sink: every
/// longer path brings new edges, so the edge-memory iteration follows the
/// plain power iteration exactly.
fn disjoint_chains(seed: u64, lengths: &[usize]) -> TrustGraph {
    let mut g = TrustGraph::new();
    let mut weight_seed = seed;
    let mut next_weight = move || {
        // Tiny LCG keeps the fixture self-contained and reproducible.
        weight_seed = weight_seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let u = ((weight_seed >> 11) as f64) / ((1u64 << 53) as f64);
        let v = (((weight_seed.wrapping_mul(48271)) >> 11) as f64) / ((1u64 << 53) as f64);
        let (td, dtd) = if u + v > 1.0 {
            (1.0 - u, 1.0 - v)
        } else {
            (u, v)
        };
        TrustTriple::new(td.max(1e-3), dtd).unwrap()
    };
    for (c, &len) in lengths.iter().enumerate() {
        let mut prev = "s".to_owned();
        for hop in 1..len {
            let mid = format!("c{c}h{hop}");
            g.add_edge(&prev, &mid, next_weight()).unwrap();
            prev = mid;
        }
        g.add_edge(&prev, "t", next_weight()).unwrap();
    }
    g
}

#[test]
fn general_engine_equals_dag_engine_on_disjoint_chain_families() {
    for seed in 0..20u64 {
        let g = disjoint_chains(seed, &[1, 2, 3, 4]);
        assert!(g.is_acyclic());
        let via_dag = dag::evaluate(&g, &EvalOptions::default()).unwrap();
        let via_general = cyclic::evaluate_general(&g, &EvalOptions::default()).unwrap();
        assert_eq!(via_dag.matrix, via_general.matrix, "seed {seed}");
        assert_eq!(via_general.termination, Termination::Fixpoint);
    }
}

/// The two engines can legitimately differ on a DAG: when a longer path uses
/// only edges already seen through shorter ones, the edge-memory guard
/// reverts the pair even though the plain powers would still refine it. Six
/// edges suffice. This pins the divergence down as a regression witness.
#[test]
fn edge_memory_reverts_can_diverge_from_plain_powers_on_dags() {
    let mut g = TrustGraph::new();
    let w = |s: u64| {
        let td = 0.35 + 0.1 * (s as f64);
        TrustTriple::new(td, 0.3 - 0.03 * (s as f64)).unwrap()
    };
    g.add_edge("i", "a", w(0)).unwrap();
    g.add_edge("a", "b", w(1)).unwrap();
    g.add_edge("b", "j", w(2)).unwrap();
    g.add_edge("i", "b", w(3)).unwrap();
    g.add_edge("b", "c", w(4)).unwrap();
    g.add_edge("c", "j", w(5)).unwrap();
    assert!(g.is_acyclic());

    let via_dag = dag::evaluate(&g, &EvalOptions::default()).unwrap();
    let via_general = cyclic::evaluate_general(&g, &EvalOptions::default()).unwrap();
    let (i, j) = (0u32, 3u32);
    // The i→a→b→c→j aggregate is missing from the edge-memory result.
    let dag_value = via_dag.matrix.get(i, j);
    let general_value = via_general.matrix.get(i, j);
    assert!(
        !dag_value.approx_eq(general_value, 1e-9),
        "expected a divergence, both gave {dag_value}"
    );
    // The plain powers side is the one matching the recursive definition.
    let reference = oracle::recursive_eval(&g, i, j, None).unwrap();
    assert!(dag_value.approx_eq(reference, 1e-12));
}

#[test]
fn memory_sets_stay_within_simple_path_edges_on_dags() {
    for seed in 0..25u64 {
        let g = random_dag(seed, 9);
        let n = g.node_count() as u32;
        let mut eval = CyclicEval::new(&g, &EvalOptions::default()).unwrap();
        while !eval.converged() {
            eval.step();
        }
        for i in 0..n {
            for j in 0..n {
                let memory = eval.memory_edges(i, j);
                if memory.is_empty() {
                    continue;
                }
                let allowed = oracle::enumerate_simple_paths(&g, i, j, n)
                    .unwrap()
                    .edge_ids(&g);
                assert!(
                    memory.iter().all(|id| allowed.binary_search(id).is_ok()),
                    "seed {seed} pair ({i},{j}): memory {memory:?} vs simple-path edges {allowed:?}"
                );
            }
        }
    }
}

#[test]
fn memory_sets_stay_within_walk_edges_on_general_graphs() {
    for seed in 0..25u64 {
        let n = 3 + (seed as usize % 7);
        let edges = (seed as usize * 5 + 4) % (n * (n - 1) + 1);
        let g = TrustGraph::random(n, edges, GraphKind::General, seed).unwrap();
        let mut eval = CyclicEval::new(&g, &EvalOptions::default()).unwrap();
        while !eval.converged() {
            eval.step();
        }
        for i in 0..n as u32 {
            for j in 0..n as u32 {
                if i == j {
                    continue;
                }
                let memory = eval.memory_edges(i, j);
                if memory.is_empty() {
                    continue;
                }
                let allowed = oracle::edges_on_walks(&g, i, j).unwrap();
                assert!(
                    memory.iter().all(|id| allowed.binary_search(id).is_ok()),
                    "seed {seed} pair ({i},{j}): memory {memory:?} vs walk edges {allowed:?}"
                );
            }
        }
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let g = TrustGraph::random(40, 320, GraphKind::General, 77).unwrap();
    let dag_g = TrustGraph::random(40, 240, GraphKind::ConfirmedAcyclic, 78).unwrap();
    let run = |threads: usize| {
        let opts = EvalOptions {
            threads: Some(threads),
            ..EvalOptions::default()
        };
        let general = cyclic::evaluate_general(&g, &opts).unwrap();
        let acyclic = dag::evaluate(&dag_g, &opts).unwrap();
        (general, acyclic)
    };
    let (g1, d1) = run(1);
    let (g4, d4) = run(4);
    assert_eq!(g1.matrix, g4.matrix);
    assert_eq!(g1.iterations, g4.iterations);
    assert_eq!(d1.matrix, d4.matrix);
    assert_eq!(d1.iterations, d4.iterations);
    let csv1 = g1.to_csv(&g);
    let csv4 = g4.to_csv(&g);
    assert_eq!(csv1, csv4);
}

#[test]
fn dag_backends_agree_bit_exactly_through_convergence() {
    for seed in 0..10u64 {
        let g = random_dag(seed, 10);
        let dense_opts = EvalOptions {
            backend: MatrixBackend::Dense,
            ..EvalOptions::default()
        };
        let sparse_opts = EvalOptions {
            backend: MatrixBackend::Sparse,
            ..EvalOptions::default()
        };
        let a = dag::evaluate(&g, &dense_opts).unwrap();
        let b = dag::evaluate(&g, &sparse_opts).unwrap();
        assert_eq!(a.iterations, b.iterations);
        let n = g.node_count() as u32;
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (a.matrix.get(i, j), b.matrix.get(i, j));
                assert_eq!(
                    (x.td().to_bits(), x.dtd().to_bits()),
                    (y.td().to_bits(), y.dtd().to_bits()),
                    "seed {seed} ({i},{j})"
                );
            }
        }
    }
}

#[test]
fn json_report_round_trips() {
    let g = TrustGraph::one_cycle_demo(t(0.9, 0.05), t(0.8, 0.1), t(0.7, 0.2), t(0.6, 0.3));
    let report = cyclic::evaluate_general(&g, &EvalOptions::default()).unwrap();
    let doc = JsonReport::new(&report, &g, "general");
    let parsed = JsonReport::from_json_str(&doc.to_json_string()).unwrap();
    assert_eq!(parsed.schema_version, doc.schema_version);
    assert_eq!(parsed.engine, "general");
    assert_eq!(parsed.iterations, report.iterations);
    assert_eq!(parsed.termination, report.termination);
    assert_eq!(parsed.pairs.len(), doc.pairs.len());
    for (a, b) in parsed.pairs.iter().zip(doc.pairs.iter()) {
        assert_eq!(a.src, b.src);
        assert_eq!(a.dst, b.dst);
        assert_eq!(a.td.to_bits(), b.td.to_bits());
        assert_eq!(a.dtd.to_bits(), b.dtd.to_bits());
    }
}
