#![allow(dead_code)]

use awpm::matching_init::{greedy_maximal, maximum_cardinality};
use awpm::{BipartiteGraph, Matching, SparseMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complete graph with weights uniform in `[lo, hi)`.
pub fn random_dense(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> BipartiteGraph {
    let w: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(lo..hi)).collect()).collect();
    BipartiteGraph::dense(&w).unwrap()
}

/// Random sparse graph containing the planted perfect matching `perm`
/// (row `perm[j]` to column `j`); every other cell is an edge with
/// probability `density`. Weights uniform in `(0, 1]`.
pub fn random_planted_graph(n: usize, density: f64, rng: &mut ChaCha8Rng) -> (BipartiteGraph, Vec<usize>) {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges = Vec::new();
    for (j, &pj) in perm.iter().enumerate() {
        for i in 0..n {
            if pj == i || rng.random_bool(density) {
                edges.push((i, j, 1.0 - rng.random::<f64>()));
            }
        }
    }
    (BipartiteGraph::from_edges(n, edges).unwrap(), perm)
}

/// Sparse matrix with a full diagonal and about `extra` random off-diagonal
/// entries per column; values of either sign, magnitudes spread over three
/// decades.
pub fn random_planted_matrix(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> SparseMatrix {
    let mut cells = std::collections::BTreeMap::new();
    let value = |rng: &mut ChaCha8Rng| {
        let mag = 10f64.powf(rng.random_range(-3.0..0.0));
        if rng.random_bool(0.5) { mag } else { -mag }
    };
    for j in 0..n {
        cells.insert((j, j), value(rng));
        for _ in 0..extra {
            let i = rng.random_range(0..n);
            let v = value(rng);
            cells.entry((i, j)).or_insert(v);
        }
    }
    SparseMatrix::from_triplets(n, n, cells.into_iter().map(|((i, j), v)| (i, j, v))).unwrap()
}

/// Greedy maximal followed by maximum cardinality.
pub fn initial_matching(g: &BipartiteGraph) -> Matching {
    maximum_cardinality(g, &greedy_maximal(g)).unwrap()
}
