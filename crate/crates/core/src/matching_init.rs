//! Initial perfect matching: a greedy maximal matching followed by an
//! augmenting-path maximum cardinality matching. Both prefer heavier edges
//! when several are admissible.

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{BipartiteGraph, Matching};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InitError {
    #[error("structurally singular: maximum matching has cardinality {cardinality} of {n}")]
    StructurallySingular { cardinality: usize, n: usize },
}

/// How to choose among several admissible edges at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Heavier edge first, then lower index.
    #[default]
    WeightThenIndex,
    /// Lower index only.
    Index,
}

pub fn greedy_maximal(g: &BipartiteGraph) -> Matching {
    greedy_maximal_with(g, TieBreak::WeightThenIndex)
}

/// Degree-1 propagation (Karp–Sipser rule) followed by a column scan in
/// ascending order, each free column taking its preferred free row.
pub fn greedy_maximal_with(g: &BipartiteGraph, tie: TieBreak) -> Matching {
    let n = g.n();
    let mut m = Matching::empty(n);
    degree_one_pass(g, &mut m);

    for j in 0..n {
        if m.mate_of_col(j).is_some() {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (&i, &w) in g.col_rows(j).iter().zip(g.col_weights(j)) {
            if m.mate_of_row(i).is_some() {
                continue;
            }
            let better = match (best, tie) {
                (None, _) => true,
                (Some((_, bw)), TieBreak::WeightThenIndex) => w > bw,
                (Some(_), TieBreak::Index) => false,
            };
            if better {
                best = Some((i, w));
            }
        }
        if let Some((i, w)) = best {
            m.set_pair(i, j, w);
        }
    }
    m
}

#[derive(Debug, Clone, Copy)]
enum Vertex {
    Row(usize),
    Col(usize),
}

/// Repeatedly matches a free vertex with exactly one free neighbor.
fn degree_one_pass(g: &BipartiteGraph, m: &mut Matching) {
    let n = g.n();
    let mut row_deg: Vec<usize> = (0..n).map(|i| g.row_degree(i)).collect();
    let mut col_deg: Vec<usize> = (0..n).map(|j| g.col_degree(j)).collect();
    let mut queue: VecDeque<Vertex> = (0..n)
        .filter(|&j| col_deg[j] == 1)
        .map(Vertex::Col)
        .chain((0..n).filter(|&i| row_deg[i] == 1).map(Vertex::Row))
        .collect();

    while let Some(v) = queue.pop_front() {
        let (i, j, w) = match v {
            Vertex::Col(j) => {
                if m.mate_of_col(j).is_some() || col_deg[j] != 1 {
                    continue;
                }
                let Some((&i, &w)) = g
                    .col_rows(j)
                    .iter()
                    .zip(g.col_weights(j))
                    .find(|(&i, _)| m.mate_of_row(i).is_none())
                else {
                    continue;
                };
                (i, j, w)
            }
            Vertex::Row(i) => {
                if m.mate_of_row(i).is_some() || row_deg[i] != 1 {
                    continue;
                }
                let Some((&j, &w)) = g
                    .row_cols(i)
                    .iter()
                    .zip(g.row_weights(i))
                    .find(|(&j, _)| m.mate_of_col(j).is_none())
                else {
                    continue;
                };
                (i, j, w)
            }
        };
        m.set_pair(i, j, w);
        // i and j leave the free graph; their free neighbors lose a degree.
        for &jj in g.row_cols(i) {
            if m.mate_of_col(jj).is_none() {
                col_deg[jj] -= 1;
                if col_deg[jj] == 1 {
                    queue.push_back(Vertex::Col(jj));
                }
            }
        }
        for &ii in g.col_rows(j) {
            if m.mate_of_row(ii).is_none() {
                row_deg[ii] -= 1;
                if row_deg[ii] == 1 {
                    queue.push_back(Vertex::Row(ii));
                }
            }
        }
    }
}

pub fn maximum_cardinality(g: &BipartiteGraph, init: &Matching) -> Result<Matching, InitError> {
    let m = maximum_cardinality_with(g, init, TieBreak::WeightThenIndex);
    if m.is_perfect() {
        Ok(m)
    } else {
        Err(InitError::StructurallySingular { cardinality: m.cardinality(), n: g.n() })
    }
}

const UNREACHED: usize = usize::MAX;

/// Maximum cardinality matching by phases of breadth-first layering from
/// free columns and depth-first extraction of vertex-disjoint shortest
/// augmenting paths. Never fails; the result may be imperfect.
pub fn maximum_cardinality_with(g: &BipartiteGraph, init: &Matching, tie: TieBreak) -> Matching {
    let n = g.n();
    let mut m = init.clone();

    // per-column neighbor order with weights
    let adj: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|j| {
            let mut list: Vec<(usize, f64)> =
                g.col_rows(j).iter().copied().zip(g.col_weights(j).iter().copied()).collect();
            if tie == TieBreak::WeightThenIndex {
                list.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            }
            list
        })
        .collect();

    let mut dist = vec![UNREACHED; n];
    let mut next = vec![0usize; n];
    let mut queue = VecDeque::new();
    let mut cols: Vec<usize> = Vec::new();
    let mut via: Vec<usize> = Vec::new();

    loop {
        // layering
        queue.clear();
        for (j, d) in dist.iter_mut().enumerate() {
            if m.mate_of_col(j).is_none() {
                *d = 0;
                queue.push_back(j);
            } else {
                *d = UNREACHED;
            }
        }
        let mut free_layer = UNREACHED;
        while let Some(j) = queue.pop_front() {
            if dist[j] >= free_layer {
                continue;
            }
            for &(i, _) in &adj[j] {
                match m.mate_of_row(i) {
                    None => free_layer = free_layer.min(dist[j] + 1),
                    Some(j2) if dist[j2] == UNREACHED => {
                        dist[j2] = dist[j] + 1;
                        queue.push_back(j2);
                    }
                    Some(_) => {}
                }
            }
        }
        if free_layer == UNREACHED {
            break;
        }

        // path extraction
        next.iter_mut().for_each(|p| *p = 0);
        let mut augmented = false;
        for root in 0..n {
            if m.mate_of_col(root).is_some() || dist[root] != 0 {
                continue;
            }
            cols.clear();
            via.clear();
            cols.push(root);
            while let Some(&j) = cols.last() {
                if next[j] == adj[j].len() {
                    dist[j] = UNREACHED;
                    cols.pop();
                    via.pop();
                    continue;
                }
                let (i, _) = adj[j][next[j]];
                next[j] += 1;
                match m.mate_of_row(i) {
                    None if dist[j] + 1 == free_layer => {
                        flip_path(&mut m, &adj, &cols, &via, i, &next);
                        augmented = true;
                        break;
                    }
                    Some(j2) if dist[j2] != UNREACHED && dist[j2] == dist[j] + 1 => {
                        cols.push(j2);
                        via.push(i);
                    }
                    _ => {}
                }
            }
            // used columns are spent for this phase
            for &j in &cols {
                dist[j] = UNREACHED;
            }
        }
        if !augmented {
            break;
        }
    }
    m
}

/// `cols[0]` is free; `via[t]` links `cols[t]` to `cols[t + 1]`; `free_row`
/// is reached from the last column.
fn flip_path(
    m: &mut Matching,
    adj: &[Vec<(usize, f64)>],
    cols: &[usize],
    via: &[usize],
    free_row: usize,
    next: &[usize],
) {
    let k = cols.len() - 1;
    // the last edge taken from each column sits just before its cursor
    let weight_at = |t: usize| adj[cols[t]][next[cols[t]] - 1].1;
    m.set_pair(free_row, cols[k], weight_at(k));
    for t in (0..k).rev() {
        m.set_pair(via[t], cols[t], weight_at(t));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{matching_weight, validate};

    fn is_maximal(g: &BipartiteGraph, m: &Matching) -> bool {
        g.edges().all(|(i, j, _)| m.mate_of_row(i).is_some() || m.mate_of_col(j).is_some())
    }

    #[test]
    fn greedy_prefers_heavy_edges() {
        let g = BipartiteGraph::dense(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let m = greedy_maximal(&g);
        assert_eq!(m.mate_of_col(0), Some(1));
        assert_eq!(m.mate_of_col(1), Some(0));
        assert_eq!(matching_weight(&g, &m).unwrap(), 5.0);
    }

    #[test]
    fn greedy_dense_ones_is_identity() {
        let g = BipartiteGraph::dense(&vec![vec![1.0; 5]; 5]).unwrap();
        let m = greedy_maximal(&g);
        for j in 0..5 {
            assert_eq!(m.mate_of_col(j), Some(j));
        }
    }

    #[test]
    fn greedy_star() {
        let g = BipartiteGraph::from_edges(4, (0..4).map(|j| (0, j, 1.0 + j as f64))).unwrap();
        let m = greedy_maximal(&g);
        assert_eq!(m.cardinality(), 1);
        assert!(is_maximal(&g, &m));
    }

    #[test]
    fn degree_one_rule_fires_before_weights() {
        // column 1 has row 0 as its only neighbor; the weight scan alone
        // would give row 0 to column 0 and strand column 1
        let g = BipartiteGraph::from_edges(2, [(0, 0, 9.0), (1, 0, 1.0), (0, 1, 1.0)]).unwrap();
        let m = greedy_maximal(&g);
        assert!(m.is_perfect());
        assert_eq!(m.mate_of_col(1), Some(0));
    }

    #[test]
    fn planted_diagonal_is_perfect() {
        let edges = (0..6).map(|k| (k, k, 1.0)).chain([(0, 1, 2.0), (1, 0, 2.0), (3, 4, 5.0)]);
        let g = BipartiteGraph::from_edges(6, edges).unwrap();
        let m = maximum_cardinality(&g, &greedy_maximal(&g)).unwrap();
        assert!(validate(&g, &m).perfect);
    }

    #[test]
    fn singular_reports_cardinality() {
        let g = BipartiteGraph::from_edges(2, [(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        let err = maximum_cardinality(&g, &greedy_maximal(&g)).unwrap_err();
        assert_eq!(err, InitError::StructurallySingular { cardinality: 1, n: 2 });
    }

    #[test]
    fn six_cycle_needs_augmentation() {
        let g = BipartiteGraph::from_edges(
            3,
            [(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0), (1, 2, 1.0), (2, 2, 1.0), (2, 0, 1.0)],
        )
        .unwrap();
        let init = Matching::from_pairs(&g, [(0, 1), (1, 2)]).unwrap();
        let m = maximum_cardinality(&g, &init).unwrap();
        assert_eq!(m.cardinality(), 3);
        assert!(validate(&g, &m).perfect);
    }

    #[test]
    fn long_augmenting_path() {
        // greedy picks the heavy off-diagonal chain, leaving one column and
        // one row free at opposite ends
        let n = 6;
        let edges = (0..n)
            .map(|k| (k, k, 1.0))
            .chain((0..n - 1).map(|k| (k + 1, k, 2.0)));
        let g = BipartiteGraph::from_edges(n, edges).unwrap();
        let init = Matching::from_pairs(&g, (0..n - 1).map(|k| (k + 1, k))).unwrap();
        let m = maximum_cardinality(&g, &init).unwrap();
        assert!(validate(&g, &m).perfect);
    }
}
