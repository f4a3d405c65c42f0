mod common;

use common::*;
use misaka_core::graph::{fixtures, scc_analyze, scc_analyze_lists, suggest_repair, SccReport, TransitionMatrix};
use rand::Rng;

fn lists(a: &[Vec<bool>]) -> Vec<Vec<usize>> {
    a.iter().map(|row| (0..row.len()).filter(|&j| row[j]).collect()).collect()
}

/// Everything in the report must follow from mutual reachability.
fn check_against_oracle(a: &[Vec<bool>], report: &SccReport) {
    let n = a.len();
    let r = reachability(a);
    let label = oracle_components(&r);
    for i in 0..n {
        for j in 0..n {
            let same = report.component_of[i] == report.component_of[j];
            assert_eq!(same, label[i] == label[j], "nodes {i},{j} in {a:?}");
        }
    }
    for (c, members) in report.components.iter().enumerate() {
        let mut want: Vec<usize> = (0..n)
            .filter(|&j| members.iter().any(|&i| a[i][j] && report.component_of[j] != c))
            .map(|j| report.component_of[j])
            .collect();
        want.sort_unstable();
        want.dedup();
        assert_eq!(report.condensation[c], want, "successors of component {c} in {a:?}");
        assert_eq!(report.closed_components.contains(&c), want.is_empty());
    }
    let mut distinct = label.clone();
    distinct.sort_unstable();
    distinct.dedup();
    assert_eq!(report.component_count(), distinct.len());
    assert_eq!(report.is_strongly_connected, distinct.len() == 1);
}

#[test]
fn scc_matches_reachability_for_every_graph_up_to_four_nodes() {
    let mut checked = 0;
    for n in 1..=4usize {
        for bits in 0u32..(1 << (n * n)) {
            let a: Vec<Vec<bool>> = (0..n)
                .map(|i| (0..n).map(|j| bits >> (i * n + j) & 1 == 1).collect())
                .collect();
            check_against_oracle(&a, &scc_analyze_lists(&lists(&a)));
            checked += 1;
        }
    }
    assert_eq!(checked, 2 + 16 + 512 + 65536);
}

#[test]
fn scc_matches_reachability_on_random_graphs() {
    let mut rng = rng(7);
    for _ in 0..1000 {
        let n = rng.gen_range(5..=8);
        let p = rng.gen_range(0.05..0.5);
        let g = random_graph(&mut rng, n, p);
        check_against_oracle(&to_bools(&g), &scc_analyze(&g));
    }
}

#[test]
fn case2_has_closed_component_nine() {
    let g = fixtures::case2();
    let report = scc_analyze(&g);
    check_against_oracle(&to_bools(&g), &report);
    assert_eq!(report.closed_members(), vec![&[8usize][..]]);
}

#[test]
fn repair_connects_and_is_minimal() {
    let mut rng = rng(8);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=10);
        let p = rng.gen_range(0.0..0.4);
        let g = random_graph(&mut rng, n, p);
        let a = to_bools(&g);
        let repair = suggest_repair(&g, &scc_analyze(&g));
        let fixed = g.with_edges(&repair).unwrap();
        assert!(scc_analyze(&fixed).is_strongly_connected, "{g:?} + {repair:?}");
        assert_eq!(repair.len(), oracle_min_repair(&a), "{g:?}");
        assert!(repair.iter().all(|&(i, j)| !g.has_edge(i, j)), "suggested an existing edge");
    }
}

/// No smaller set of new edges works, by exhaustive search on small graphs.
#[test]
fn repair_size_is_optimal_by_brute_force() {
    let mut rng = rng(9);
    for _ in 0..300 {
        let n = rng.gen_range(2..=4);
        let p = rng.gen_range(0.0..0.5);
        let g = random_graph(&mut rng, n, p);
        let a = to_bools(&g);
        let k = suggest_repair(&g, &scc_analyze(&g)).len();
        let missing: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !a[i][j])
            .collect();
        // Every subset of fewer than k missing edges must leave it disconnected.
        for mask in 0u64..(1 << missing.len()) {
            if (mask.count_ones() as usize) >= k {
                continue;
            }
            let mut b = a.clone();
            for (bit, &(i, j)) in missing.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    b[i][j] = true;
                }
            }
            assert!(!strongly_connected(&b), "{g:?}: {mask:b} beats {k}");
        }
    }
}

#[test]
fn two_disjoint_pairs_need_two_edges() {
    let g = misaka_core::DirectedGraph::new(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
    assert_eq!(suggest_repair(&g, &scc_analyze(&g)).len(), 2);
}

#[test]
fn stochastic_invariants_on_random_graphs() {
    let mut rng = rng(10);
    for _ in 0..500 {
        let n = rng.gen_range(1..=10);
        let p = rng.gen_range(0.05..0.6);
        let g = random_graph(&mut rng, n, p);
        let row = TransitionMatrix::row_stochastic(&g);
        let col = TransitionMatrix::column_stochastic(&g);
        for i in 0..n {
            assert!((row.row_sums()[i] - 1.0).abs() < 1e-12);
            assert!((col.column_sums()[i] - 1.0).abs() < 1e-12);
            for j in 0..n {
                assert!(row.get(i, j) >= 0.0 && col.get(i, j) >= 0.0);
                assert_eq!(row.get(i, j) > 0.0, g.has_edge(i, j));
                assert_eq!(col.get(i, j) > 0.0, g.has_edge(j, i));
            }
        }
        let sym = {
            let s = g.symmetrized();
            let loops: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
            s.with_edges(&loops).unwrap()
        };
        let m = TransitionMatrix::metropolis(&sym).unwrap();
        for i in 0..n {
            assert!((m.row_sums()[i] - 1.0).abs() < 1e-12);
            assert!((m.column_sums()[i] - 1.0).abs() < 1e-12);
            for j in 0..n {
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }
}
