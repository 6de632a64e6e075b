mod common;

use awpm::awac_dist::{awac_distributed, DistConfig, ProcessGrid};
use awpm::awac_seq::{awac_sequential, find_best_cycle, find_best_cycle_counted, SearchWork};
use awpm::graph::{cycle_at, matching_weight, validate};
use awpm::{BipartiteGraph, Matching};
use proptest::prelude::*;

fn planted() -> impl Strategy<Value = (BipartiteGraph, Matching)> {
    (2usize..40, 0.05f64..0.5, any::<u64>()).prop_map(|(n, density, seed)| {
        let mut r = common::rng(seed);
        let (g, perm) = common::random_planted_graph(n, density, &mut r);
        let m = Matching::from_row_permutation(&g, &perm).unwrap();
        (g, m)
    })
}

/// Best gain over every cycle rooted at `j`, by direct enumeration.
fn best_gain_naive(g: &BipartiteGraph, m: &Matching, j: usize) -> Option<f64> {
    (0..g.n())
        .filter_map(|i| cycle_at(g, m, i, j).ok().flatten())
        .map(|c| c.gain)
        .filter(|&gain| gain > 0.0)
        .max_by(f64::total_cmp)
}

proptest! {
    #[test]
    fn best_cycle_matches_enumeration((g, m) in planted()) {
        for j in 0..g.n() {
            let mut work = SearchWork::default();
            let found = find_best_cycle_counted(&g, &m, j, &mut work).unwrap();
            prop_assert_eq!(found.map(|c| c.gain), best_gain_naive(&g, &m, j));
            let deg = g.col_degree(j);
            prop_assert_eq!(work.neighbors, deg);
            let lookups = (g.max_degree() as f64).log2().floor() as usize + 1;
            prop_assert!(work.probes <= deg * lookups);
        }
    }

    #[test]
    fn sequential_monotone_and_converges((g, m) in planted()) {
        let mut current = m;
        let mut w = matching_weight(&g, &current).unwrap();
        loop {
            let (next, stats) = awac_sequential(&g, &current, 1).unwrap();
            prop_assert!(validate(&g, &next).is_valid() && next.is_perfect());
            let w_next = matching_weight(&g, &next).unwrap();
            if stats.converged {
                prop_assert_eq!(&next, &current);
                break;
            }
            prop_assert!(w_next > w);
            prop_assert!((w_next - w - stats.total_gain).abs() <= 1e-9 * w_next.max(1.0));
            current = next;
            w = w_next;
        }
        for j in 0..g.n() {
            prop_assert!(find_best_cycle(&g, &current, j).unwrap().is_none());
        }
    }

    #[test]
    fn sequential_is_deterministic((g, m) in planted()) {
        let a = awac_sequential(&g, &m, 20).unwrap();
        let b = awac_sequential(&g, &m, 20).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn grid_rounds_keep_invariants((g, m) in planted(), q in 1usize..5, seed in any::<u64>()) {
        prop_assume!(q <= g.n());
        let mut grid = ProcessGrid::partition(&g, &m, q, Some(seed)).unwrap();
        let mut w = matching_weight(&g, &m).unwrap();
        for _ in 0..50 {
            let round = grid.run_round().unwrap();
            let current = grid.gather();
            grid.check_consistency(&current).unwrap();
            prop_assert!(validate(&g, &current).is_valid() && current.is_perfect());
            let w_next = matching_weight(&g, &current).unwrap();
            prop_assert!(w_next >= w);
            prop_assert!(round.stats.a_requests <= g.m());
            prop_assert!(round.stats.c_requests <= g.n());
            prop_assert!(round.stats.cycles_applied <= round.stats.c_requests);
            w = w_next;
            if round.stats.b_requests == 0 {
                break;
            }
        }
    }

    #[test]
    fn grid_independent_of_shape_seed_and_workers((g, m) in planted(), seed in any::<u64>()) {
        let base = awac_distributed(&g, &m, &DistConfig::default()).unwrap();
        for q in 2..=4usize.min(g.n()) {
            for workers in [1, 3] {
                let cfg = DistConfig { grid_dim: q, seed: Some(seed), workers, ..DistConfig::default() };
                let (out, stats) = awac_distributed(&g, &m, &cfg).unwrap();
                prop_assert_eq!(&out, &base.0);
                prop_assert_eq!(stats.rounds.len(), base.1.rounds.len());
                prop_assert_eq!(stats.cycles_applied, base.1.cycles_applied);
            }
        }
    }
}

/// Where every candidate cycle is already vertex-disjoint, one grid round
/// applies the same cycles as one sequential iteration.
#[test]
fn grid_equals_sequential_without_conflicts() {
    // two independent 2x2 blocks, each with one improving cycle
    let w = [
        vec![1.0, 2.0, 0.0, 0.0],
        vec![3.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 5.0],
        vec![0.0, 0.0, 4.0, 1.0],
    ];
    let edges = w
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(j, v)| (i, j, *v)));
    let g = BipartiteGraph::from_edges(4, edges).unwrap();
    let m = Matching::from_pairs(&g, (0..4).map(|k| (k, k))).unwrap();
    let (seq, _) = awac_sequential(&g, &m, 20).unwrap();
    for q in 1..=4 {
        let cfg = DistConfig { grid_dim: q, ..DistConfig::default() };
        let (grid, stats) = awac_distributed(&g, &m, &cfg).unwrap();
        assert_eq!(grid, seq);
        assert_eq!(stats.rounds[0].cycles_applied, 2);
        assert_eq!(matching_weight(&g, &grid).unwrap(), 14.0);
    }
}
