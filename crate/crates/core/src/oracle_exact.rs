//! Exact maximum-weight perfect matching, used as ground truth.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::graph::{matching_weight, BipartiteGraph, Matching, MatchingError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("graph has no perfect matching")]
    NoPerfectMatching,
    #[error("brute force limited to n <= {limit}, got {n}")]
    TooLarge { n: usize, limit: usize },
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error("optimum weight is {0}; a ratio is undefined")]
    NonPositiveOptimum(f64),
}

pub const BRUTE_FORCE_LIMIT: usize = 10;

/// Enumerates every row permutation.
pub fn brute_force_mwpm(g: &BipartiteGraph) -> Result<(Matching, f64), OracleError> {
    let n = g.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(OracleError::TooLarge { n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    search(g, 0, 0.0, &mut perm, &mut used, &mut best);
    let (perm, w) = best.ok_or(OracleError::NoPerfectMatching)?;
    Ok((Matching::from_row_permutation(g, &perm)?, w))
}

fn search(
    g: &BipartiteGraph,
    col: usize,
    acc: f64,
    perm: &mut Vec<usize>,
    used: &mut [bool],
    best: &mut Option<(Vec<usize>, f64)>,
) {
    if col == g.n() {
        if best.as_ref().is_none_or(|(_, w)| acc > *w) {
            *best = Some((perm.clone(), acc));
        }
        return;
    }
    for (&i, &w) in g.col_rows(col).iter().zip(g.col_weights(col)) {
        if used[i] {
            continue;
        }
        used[i] = true;
        perm.push(i);
        search(g, col + 1, acc + w, perm, used, best);
        perm.pop();
        used[i] = false;
    }
}

/// Optimal matching with a dual certificate: `w(i, j) <= row_potential[i]
/// + col_potential[j]` on every edge, with equality on matched edges.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub matching: Matching,
    pub weight: f64,
    pub row_potential: Vec<f64>,
    pub col_potential: Vec<f64>,
}

impl ExactSolution {
    /// Largest violation of dual feasibility or complementary slackness.
    pub fn certificate_error(&self, g: &BipartiteGraph) -> f64 {
        let mut worst = 0.0f64;
        for (i, j, w) in g.edges() {
            let slack = w - self.row_potential[i] - self.col_potential[j];
            worst = worst.max(slack);
            if self.matching.mate_of_row(i) == Some(j) {
                worst = worst.max(slack.abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Successive shortest augmenting paths with potentials (Hungarian method)
/// on costs `-w`, one Dijkstra search per column.
pub fn exact_mwpm(g: &BipartiteGraph) -> Result<ExactSolution, OracleError> {
    let n = g.n();
    // Reduced cost of (i, j) is c(i, j) - u[i] - v[j] >= 0 with c = -w.
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];
    for (j, vj) in v.iter_mut().enumerate() {
        *vj = g
            .col_weights(j)
            .iter()
            .map(|w| -w)
            .min_by(f64::total_cmp)
            .ok_or(OracleError::NoPerfectMatching)?;
    }

    let mut m = Matching::empty(n);
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut settled: Vec<usize> = Vec::new();
    let mut heap = BinaryHeap::new();

    for root in 0..n {
        for &i in &touched {
            dist[i] = f64::INFINITY;
            done[i] = false;
        }
        touched.clear();
        settled.clear();
        heap.clear();

        relax(g, root, 0.0, &u, &v, &mut dist, &mut pred, &mut touched, &done, &mut heap);
        let (sink, sink_dist) = loop {
            let Some((Reverse(Dist(d)), i)) = heap.pop() else {
                return Err(OracleError::NoPerfectMatching);
            };
            if done[i] || d > dist[i] {
                continue;
            }
            done[i] = true;
            match m.mate_of_row(i) {
                None => break (i, d),
                Some(j) => {
                    settled.push(i);
                    relax(g, j, d, &u, &v, &mut dist, &mut pred, &mut touched, &done, &mut heap);
                }
            }
        };

        // Potential update keeps reduced costs nonnegative and makes the
        // path tight.
        v[root] += sink_dist;
        for &i in &settled {
            let j = m.mate_of_row(i).expect("settled rows are matched");
            u[i] += dist[i] - sink_dist;
            v[j] += sink_dist - dist[i];
        }

        let mut i = sink;
        loop {
            let j = pred[i];
            let prev = m.mate_of_col(j);
            let w = g.weight(i, j).expect("path edges exist");
            m.set_pair(i, j, w);
            match prev {
                Some(r) if j != root => i = r,
                _ => break,
            }
        }
    }

    let weight = matching_weight(g, &m)?;
    Ok(ExactSolution {
        matching: m,
        weight,
        row_potential: u.iter().map(|x| -x).collect(),
        col_potential: v.iter().map(|x| -x).collect(),
    })
}

#[allow(clippy::too_many_arguments)]
fn relax(
    g: &BipartiteGraph,
    j: usize,
    base: f64,
    u: &[f64],
    v: &[f64],
    dist: &mut [f64],
    pred: &mut [usize],
    touched: &mut Vec<usize>,
    done: &[bool],
    heap: &mut BinaryHeap<(Reverse<Dist>, usize)>,
) {
    for (&i, &w) in g.col_rows(j).iter().zip(g.col_weights(j)) {
        if done[i] {
            continue;
        }
        let reduced = (-w - u[i] - v[j]).max(0.0);
        let d = base + reduced;
        if d < dist[i] {
            if dist[i] == f64::INFINITY {
                touched.push(i);
            }
            dist[i] = d;
            pred[i] = j;
            heap.push((Reverse(Dist(d)), i));
        }
    }
}

/// `w(M) / w(M*)`. Only meaningful when the optimum is positive.
pub fn approximation_ratio(g: &BipartiteGraph, m: &Matching) -> Result<f64, OracleError> {
    let opt = exact_mwpm(g)?.weight;
    ratio_against(g, m, opt)
}

pub fn ratio_against(g: &BipartiteGraph, m: &Matching, optimum: f64) -> Result<f64, OracleError> {
    if m.n() != g.n() || !m.is_perfect() {
        return Err(MatchingError::NotPerfect.into());
    }
    if optimum <= 0.0 {
        return Err(OracleError::NonPositiveOptimum(optimum));
    }
    Ok(matching_weight(g, m)? / optimum)
}
