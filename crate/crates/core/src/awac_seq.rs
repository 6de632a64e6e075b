//! Sequential approximate-weight augmenting cycles.
//!
//! Each iteration collects, for every column, its best positive-gain
//! alternating 4-cycle, keeps a vertex-disjoint subset greedily by gain,
//! and exchanges the kept cycles. A perfect matching with no augmenting
//! 4-cycle is 2/3-optimal.

use crate::graph::{BipartiteGraph, Cycle4, Matching, MatchingError};

pub const DEFAULT_MAXITER: usize = 20;

/// Work done by one cycle search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchWork {
    /// Neighbors of the root column examined.
    pub neighbors: usize,
    /// Binary-search probes spent on closing-edge lookups.
    pub probes: usize,
}

pub fn find_best_cycle(g: &BipartiteGraph, m: &Matching, j: usize) -> Result<Option<Cycle4>, MatchingError> {
    find_best_cycle_counted(g, m, j, &mut SearchWork::default())
}

/// Max-gain cycle rooted at column `j`; ties go to the lowest row.
pub fn find_best_cycle_counted(
    g: &BipartiteGraph,
    m: &Matching,
    j: usize,
    work: &mut SearchWork,
) -> Result<Option<Cycle4>, MatchingError> {
    let mj = m.mate_of_col(j).ok_or(MatchingError::NotPerfect)?;
    let w_mj_j = m.col_weight(j);
    let mut best: Option<Cycle4> = None;
    for (&i, &w_ij) in g.col_rows(j).iter().zip(g.col_weights(j)) {
        work.neighbors += 1;
        if i == mj {
            continue;
        }
        let mi = m.mate_of_row(i).ok_or(MatchingError::NotPerfect)?;
        let Some(w_close) = g.weight_counted(mj, mi, &mut work.probes) else {
            continue;
        };
        let gain = w_ij + w_close - m.row_weight(i) - w_mj_j;
        // rows are visited in ascending order, so strict > keeps the lowest
        if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
            best = Some(Cycle4 { i, j, mj, mi, gain });
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeqStats {
    /// Iterations that applied at least one cycle.
    pub iterations: usize,
    pub cycles_applied: usize,
    pub total_gain: f64,
    /// Candidate set was empty before `maxiter` ran out.
    pub converged: bool,
}

/// Vertex-disjoint subset of `candidates`, scanned by descending gain
/// (ties to the lower root column).
pub fn greedy_disjoint(n: usize, candidates: &[Cycle4]) -> Vec<Cycle4> {
    let mut order: Vec<&Cycle4> = candidates.iter().collect();
    order.sort_by(|a, b| b.gain.total_cmp(&a.gain).then(a.j.cmp(&b.j)));
    let mut row_used = vec![false; n];
    let mut col_used = vec![false; n];
    let mut kept = Vec::new();
    for c in order {
        if row_used[c.i] || row_used[c.mj] || col_used[c.j] || col_used[c.mi] {
            continue;
        }
        row_used[c.i] = true;
        row_used[c.mj] = true;
        col_used[c.j] = true;
        col_used[c.mi] = true;
        kept.push(*c);
    }
    kept
}

pub fn awac_sequential(
    g: &BipartiteGraph,
    m: &Matching,
    maxiter: usize,
) -> Result<(Matching, SeqStats), MatchingError> {
    if m.n() != g.n() {
        return Err(MatchingError::SizeMismatch { matching: m.n(), graph: g.n() });
    }
    if !m.is_perfect() {
        return Err(MatchingError::NotPerfect);
    }
    let mut m = m.clone();
    let mut stats = SeqStats::default();
    for _ in 0..maxiter {
        let mut candidates = Vec::new();
        for j in 0..g.n() {
            if let Some(c) = find_best_cycle(g, &m, j)? {
                candidates.push(c);
            }
        }
        if candidates.is_empty() {
            stats.converged = true;
            break;
        }
        for c in greedy_disjoint(g.n(), &candidates) {
            m.apply_cycle(g, &c)?;
            stats.cycles_applied += 1;
            stats.total_gain += c.gain;
        }
        stats.iterations += 1;
    }
    Ok((m, stats))
}
