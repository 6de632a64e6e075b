//! Weighted bipartite graphs, perfect matchings, and alternating 4-cycles.

use std::fmt::Write as _;

use thiserror::Error;

use crate::matrix_io::SparseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("matrix is {rows}x{cols}; a square matrix is required")]
    NotSquare { rows: usize, cols: usize },
    #[error("edge ({row}, {col}) outside a graph with {n} vertices per side")]
    OutOfRange { row: usize, col: usize, n: usize },
    #[error("parallel edge ({row}, {col})")]
    ParallelEdge { row: usize, col: usize },
    #[error("weight of edge ({row}, {col}) is not finite")]
    NonFiniteWeight { row: usize, col: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchingError {
    #[error("matching is not perfect")]
    NotPerfect,
    #[error("invalid matching: {0}")]
    Invalid(ValidityReport),
    #[error("({row}, {col}) is not an edge")]
    NotAnEdge { row: usize, col: usize },
    #[error("row {row} is the mate of column {col}; no cycle is rooted there")]
    MatchedEdge { row: usize, col: usize },
    #[error("cycle refers to matched edges no longer in the matching")]
    StaleCycle,
    #[error("matching size {matching} does not match graph size {graph}")]
    SizeMismatch { matching: usize, graph: usize },
}

/// A square weighted bipartite graph stored in both column-major and
/// row-major form. Each adjacency list is sorted by vertex index.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    n: usize,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_weights: Vec<f64>,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_weights: Vec<f64>,
}

impl BipartiteGraph {
    /// Builds a graph from 0-based `(row, col, weight)` edges.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut edges: Vec<(usize, usize, f64)> = edges.into_iter().collect();
        for &(row, col, w) in &edges {
            if row >= n || col >= n {
                return Err(GraphError::OutOfRange { row, col, n });
            }
            if !w.is_finite() {
                return Err(GraphError::NonFiniteWeight { row, col });
            }
        }
        edges.sort_by_key(|&(r, c, _)| (c, r));
        if let Some(w) = edges.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(GraphError::ParallelEdge { row: w[0].0, col: w[0].1 });
        }

        let mut col_ptr = vec![0usize; n + 1];
        for &(_, c, _) in &edges {
            col_ptr[c + 1] += 1;
        }
        for k in 0..n {
            col_ptr[k + 1] += col_ptr[k];
        }
        let col_rows = edges.iter().map(|e| e.0).collect();
        let col_weights = edges.iter().map(|e| e.2).collect();

        edges.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        for &(r, _, _) in &edges {
            row_ptr[r + 1] += 1;
        }
        for k in 0..n {
            row_ptr[k + 1] += row_ptr[k];
        }
        let row_cols = edges.iter().map(|e| e.1).collect();
        let row_weights = edges.iter().map(|e| e.2).collect();

        Ok(BipartiteGraph { n, col_ptr, col_rows, col_weights, row_ptr, row_cols, row_weights })
    }

    pub fn from_matrix(a: &SparseMatrix) -> Result<Self, GraphError> {
        if a.n_rows() != a.n_cols() {
            return Err(GraphError::NotSquare { rows: a.n_rows(), cols: a.n_cols() });
        }
        Self::from_edges(a.n_rows(), a.entries().iter().map(|e| (e.row, e.col, e.value)))
    }

    /// Complete bipartite graph with `w[i][j]` as the weight of `(i, j)`.
    pub fn dense(w: &[Vec<f64>]) -> Result<Self, GraphError> {
        let n = w.len();
        if let Some(r) = w.iter().find(|r| r.len() != n) {
            return Err(GraphError::NotSquare { rows: n, cols: r.len() });
        }
        Self::from_edges(
            n,
            w.iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &x)| (i, j, x))),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.col_rows.len()
    }

    pub fn col_rows(&self, j: usize) -> &[usize] {
        &self.col_rows[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub fn col_weights(&self, j: usize) -> &[f64] {
        &self.col_weights[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.row_cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn row_weights(&self, i: usize) -> &[f64] {
        &self.row_weights[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn col_degree(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    pub fn row_degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n)
            .map(|v| self.col_degree(v).max(self.row_degree(v)))
            .max()
            .unwrap_or(0)
    }

    /// `(row, col, weight)` for every edge, column-major.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |j| {
            self.col_rows(j)
                .iter()
                .zip(self.col_weights(j))
                .map(move |(&i, &w)| (i, j, w))
        })
    }

    /// Weight of edge `(i, j)`, by binary search in column `j`.
    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.weight_counted(i, j, &mut 0)
    }

    /// Like [`weight`](Self::weight), adding the number of probes made to `probes`.
    pub fn weight_counted(&self, i: usize, j: usize, probes: &mut usize) -> Option<f64> {
        let rows = self.col_rows(j);
        let (mut lo, mut hi) = (0, rows.len());
        while lo < hi {
            *probes += 1;
            let mid = lo + (hi - lo) / 2;
            match rows[mid].cmp(&i) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(self.col_weights(j)[mid]),
            }
        }
        None
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.weight(i, j).is_some()
    }
}

/// Mate maps for rows and columns, plus the cached weight of each matched edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    mate_of_row: Vec<Option<usize>>,
    mate_of_col: Vec<Option<usize>>,
    weight_of_row: Vec<f64>,
    weight_of_col: Vec<f64>,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching {
            mate_of_row: vec![None; n],
            mate_of_col: vec![None; n],
            weight_of_row: vec![0.0; n],
            weight_of_col: vec![0.0; n],
        }
    }

    /// Builds a matching from `(row, col)` pairs, taking weights from `g`.
    pub fn from_pairs<I>(g: &BipartiteGraph, pairs: I) -> Result<Self, MatchingError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut m = Matching::empty(g.n());
        for (i, j) in pairs {
            if i >= g.n() || j >= g.n() {
                return Err(MatchingError::NotAnEdge { row: i, col: j });
            }
            let w = g.weight(i, j).ok_or(MatchingError::NotAnEdge { row: i, col: j })?;
            if m.mate_of_row[i].is_some() || m.mate_of_col[j].is_some() {
                let mut report = ValidityReport::default();
                report.violations.push(Violation::Involution { row: i, col: j });
                return Err(MatchingError::Invalid(report));
            }
            m.set_pair(i, j, w);
        }
        Ok(m)
    }

    /// Builds a perfect matching where row `perm[j]` is matched to column `j`.
    pub fn from_row_permutation(g: &BipartiteGraph, perm: &[usize]) -> Result<Self, MatchingError> {
        if perm.len() != g.n() {
            return Err(MatchingError::SizeMismatch { matching: perm.len(), graph: g.n() });
        }
        Self::from_pairs(g, perm.iter().enumerate().map(|(j, &i)| (i, j)))
    }

    /// Assembles a matching from raw parts without any checking.
    /// Use [`validate`] to inspect the result.
    pub fn from_raw_parts(
        mate_of_row: Vec<Option<usize>>,
        mate_of_col: Vec<Option<usize>>,
        weight_of_row: Vec<f64>,
        weight_of_col: Vec<f64>,
    ) -> Self {
        Matching { mate_of_row, mate_of_col, weight_of_row, weight_of_col }
    }

    pub fn n(&self) -> usize {
        self.mate_of_row.len()
    }

    pub fn mate_of_row(&self, i: usize) -> Option<usize> {
        self.mate_of_row[i]
    }

    pub fn mate_of_col(&self, j: usize) -> Option<usize> {
        self.mate_of_col[j]
    }

    /// Cached `w(i, m_i)`; zero when `i` is unmatched.
    pub fn row_weight(&self, i: usize) -> f64 {
        self.weight_of_row[i]
    }

    /// Cached `w(m_j, j)`; zero when `j` is unmatched.
    pub fn col_weight(&self, j: usize) -> f64 {
        self.weight_of_col[j]
    }

    pub fn mates_of_rows(&self) -> &[Option<usize>] {
        &self.mate_of_row
    }

    pub fn mates_of_cols(&self) -> &[Option<usize>] {
        &self.mate_of_col
    }

    pub fn cardinality(&self) -> usize {
        self.mate_of_row.iter().filter(|m| m.is_some()).count()
    }

    pub fn is_perfect(&self) -> bool {
        self.mate_of_row.iter().all(Option::is_some) && self.mate_of_col.iter().all(Option::is_some)
    }

    /// Sum of cached matched-edge weights, in row order.
    pub fn cached_weight(&self) -> f64 {
        self.mate_of_row
            .iter()
            .zip(&self.weight_of_row)
            .filter(|(m, _)| m.is_some())
            .map(|(_, w)| w)
            .sum()
    }

    /// Matches `i` with `j`. Former mates of either vertex are not unlinked.
    pub(crate) fn set_pair(&mut self, i: usize, j: usize, w: f64) {
        self.mate_of_row[i] = Some(j);
        self.mate_of_col[j] = Some(i);
        self.weight_of_row[i] = w;
        self.weight_of_col[j] = w;
    }

    /// Exchanges matched and unmatched edges along `c` in place.
    pub fn apply_cycle(&mut self, g: &BipartiteGraph, c: &Cycle4) -> Result<(), MatchingError> {
        if self.mate_of_row.get(c.i).copied().flatten() != Some(c.mi)
            || self.mate_of_row.get(c.mj).copied().flatten() != Some(c.j)
            || self.mate_of_col[c.mi] != Some(c.i)
            || self.mate_of_col[c.j] != Some(c.mj)
        {
            return Err(MatchingError::StaleCycle);
        }
        let w_ij = g.weight(c.i, c.j).ok_or(MatchingError::NotAnEdge { row: c.i, col: c.j })?;
        let w_close = g
            .weight(c.mj, c.mi)
            .ok_or(MatchingError::NotAnEdge { row: c.mj, col: c.mi })?;
        self.set_pair(c.i, c.j, w_ij);
        self.set_pair(c.mj, c.mi, w_close);
        Ok(())
    }

    /// Rows matched to each column, 1-based, one per line.
    pub fn format_permutation(&self) -> Result<String, MatchingError> {
        let mut out = String::with_capacity(self.n() * 8);
        for j in 0..self.n() {
            let i = self.mate_of_col[j].ok_or(MatchingError::NotPerfect)?;
            let _ = writeln!(out, "{}", i + 1);
        }
        Ok(out)
    }
}

/// An alternating 4-cycle: unmatched edges `(i, j)` and `(mj, mi)`,
/// matched edges `(i, mi)` and `(mj, j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cycle4 {
    pub i: usize,
    pub j: usize,
    pub mj: usize,
    pub mi: usize,
    pub gain: f64,
}

impl Cycle4 {
    pub fn rows(&self) -> [usize; 2] {
        [self.i, self.mj]
    }

    pub fn cols(&self) -> [usize; 2] {
        [self.j, self.mi]
    }

    pub fn shares_vertex_with(&self, other: &Cycle4) -> bool {
        self.rows().iter().any(|r| other.rows().contains(r))
            || self.cols().iter().any(|c| other.cols().contains(c))
    }
}

/// Gain of the cycle through unmatched edge `(i, j)` and the mates of both
/// endpoints, or `None` when the closing edge `(m_j, m_i)` is absent.
pub fn gain_of(g: &BipartiteGraph, m: &Matching, i: usize, j: usize) -> Result<Option<f64>, MatchingError> {
    Ok(cycle_at(g, m, i, j)?.map(|c| c.gain))
}

/// The 4-cycle through unmatched edge `(i, j)`, whatever its gain.
pub fn cycle_at(g: &BipartiteGraph, m: &Matching, i: usize, j: usize) -> Result<Option<Cycle4>, MatchingError> {
    let w_ij = g.weight(i, j).ok_or(MatchingError::NotAnEdge { row: i, col: j })?;
    let mi = m.mate_of_row(i).ok_or(MatchingError::NotPerfect)?;
    let mj = m.mate_of_col(j).ok_or(MatchingError::NotPerfect)?;
    if mj == i {
        return Err(MatchingError::MatchedEdge { row: i, col: j });
    }
    if m.mate_of_col(mi).is_none() || m.mate_of_row(mj).is_none() {
        return Err(MatchingError::NotPerfect);
    }
    Ok(g.weight(mj, mi).map(|w_close| Cycle4 {
        i,
        j,
        mj,
        mi,
        gain: w_ij + w_close - m.row_weight(i) - m.col_weight(j),
    }))
}

/// Returns a copy of `m` with cycle `c` exchanged.
pub fn augment(g: &BipartiteGraph, m: &Matching, c: &Cycle4) -> Result<Matching, MatchingError> {
    let mut out = m.clone();
    out.apply_cycle(g, c)?;
    Ok(out)
}

/// Sum of matched edge weights after checking `m` against `g`.
pub fn matching_weight(g: &BipartiteGraph, m: &Matching) -> Result<f64, MatchingError> {
    let report = validate(g, m);
    if !report.violations.is_empty() {
        return Err(MatchingError::Invalid(report));
    }
    Ok(m.cached_weight())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    SizeMismatch { matching: usize, graph: usize },
    OutOfRange { row: usize, col: usize },
    /// `mate_of_row[row] = col` but `mate_of_col[col] != row`, or the reverse.
    Involution { row: usize, col: usize },
    NonEdge { row: usize, col: usize },
    CacheMismatch { row: usize, col: usize, cached: f64, actual: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidityReport {
    pub perfect: bool,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "perfect={}, {} violation(s)", self.perfect, self.violations.len())?;
        if let Some(v) = self.violations.first() {
            write!(f, ", first: {v:?}")?;
        }
        Ok(())
    }
}

pub fn validate(g: &BipartiteGraph, m: &Matching) -> ValidityReport {
    let n = g.n();
    let mut violations = Vec::new();
    if m.mate_of_row.len() != n
        || m.mate_of_col.len() != n
        || m.weight_of_row.len() != n
        || m.weight_of_col.len() != n
    {
        violations.push(Violation::SizeMismatch { matching: m.mate_of_row.len(), graph: n });
        return ValidityReport { perfect: false, violations };
    }

    for (i, mate) in m.mate_of_row.iter().enumerate() {
        let Some(j) = *mate else { continue };
        if j >= n {
            violations.push(Violation::OutOfRange { row: i, col: j });
            continue;
        }
        if m.mate_of_col[j] != Some(i) {
            violations.push(Violation::Involution { row: i, col: j });
        }
        match g.weight(i, j) {
            None => violations.push(Violation::NonEdge { row: i, col: j }),
            Some(w) => {
                if m.weight_of_row[i] != w {
                    violations.push(Violation::CacheMismatch { row: i, col: j, cached: m.weight_of_row[i], actual: w });
                } else if m.weight_of_col[j] != w && m.mate_of_col[j] == Some(i) {
                    violations.push(Violation::CacheMismatch { row: i, col: j, cached: m.weight_of_col[j], actual: w });
                }
            }
        }
    }
    for (j, mate) in m.mate_of_col.iter().enumerate() {
        let Some(i) = *mate else { continue };
        if i >= n {
            violations.push(Violation::OutOfRange { row: i, col: j });
        } else if m.mate_of_row[i] != Some(j) {
            violations.push(Violation::Involution { row: i, col: j });
        }
    }

    let perfect = violations.is_empty() && m.is_perfect();
    ValidityReport { perfect, violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> BipartiteGraph {
        BipartiteGraph::dense(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap()
    }

    fn diagonal(g: &BipartiteGraph) -> Matching {
        Matching::from_pairs(g, (0..g.n()).map(|k| (k, k))).unwrap()
    }

    #[test]
    fn adjacency_views_agree() {
        let g = BipartiteGraph::from_edges(3, [(0, 1, 1.0), (2, 0, 2.0), (1, 1, 3.0), (0, 0, 4.0)]).unwrap();
        assert_eq!(g.col_rows(0), &[0, 2]);
        assert_eq!(g.col_rows(1), &[0, 1]);
        assert_eq!(g.row_cols(0), &[0, 1]);
        assert_eq!(g.row_weights(0), &[4.0, 1.0]);
        assert_eq!(g.weight(2, 0), Some(2.0));
        assert_eq!(g.weight(2, 1), None);
        assert_eq!(g.m(), 4);
    }

    #[test]
    fn rejects_parallel_edges() {
        let err = BipartiteGraph::from_edges(2, [(0, 1, 1.0), (0, 1, 2.0)]).unwrap_err();
        assert_eq!(err, GraphError::ParallelEdge { row: 0, col: 1 });
    }

    #[test]
    fn weights_of_matchings() {
        let g = two_by_two();
        assert_eq!(matching_weight(&g, &diagonal(&g)).unwrap(), 2.0);
        assert_eq!(matching_weight(&g, &Matching::empty(2)).unwrap(), 0.0);
        let ones = BipartiteGraph::dense(&vec![vec![1.0; 3]; 3]).unwrap();
        let m = Matching::from_row_permutation(&ones, &[2, 0, 1]).unwrap();
        assert_eq!(matching_weight(&ones, &m).unwrap(), 3.0);
    }

    #[test]
    fn gain_examples() {
        let g = two_by_two();
        let m = diagonal(&g);
        assert_eq!(gain_of(&g, &m, 1, 0).unwrap(), Some(3.0));

        let ones = BipartiteGraph::dense(&vec![vec![1.0; 3]; 3]).unwrap();
        let m = diagonal(&ones);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(gain_of(&ones, &m, i, j).unwrap(), Some(0.0));
                }
            }
        }
    }

    #[test]
    fn gain_without_closing_edge() {
        // closing edge (m_j, m_i) = (0, 1) absent
        let g = BipartiteGraph::from_edges(2, [(0, 0, 1.0), (1, 1, 1.0), (1, 0, 5.0)]).unwrap();
        let m = diagonal(&g);
        assert_eq!(gain_of(&g, &m, 1, 0).unwrap(), None);
    }

    #[test]
    fn gain_requires_perfect_matching() {
        let g = two_by_two();
        let m = Matching::from_pairs(&g, [(0, 0)]).unwrap();
        assert_eq!(gain_of(&g, &m, 0, 1), Err(MatchingError::NotPerfect));
    }

    #[test]
    fn augment_and_reverse() {
        let g = two_by_two();
        let m = diagonal(&g);
        let c = cycle_at(&g, &m, 1, 0).unwrap().unwrap();
        let m2 = augment(&g, &m, &c).unwrap();
        assert_eq!(m2.mate_of_col(0), Some(1));
        assert_eq!(m2.mate_of_col(1), Some(0));
        assert_eq!(matching_weight(&g, &m2).unwrap(), 5.0);

        let back = cycle_at(&g, &m2, c.mj, c.j).unwrap().unwrap();
        assert_eq!(back.gain, -3.0);
        assert_eq!(augment(&g, &m2, &back).unwrap(), m);
    }

    #[test]
    fn stale_cycle_rejected() {
        let g = two_by_two();
        let m = diagonal(&g);
        let c = cycle_at(&g, &m, 1, 0).unwrap().unwrap();
        let m2 = augment(&g, &m, &c).unwrap();
        assert_eq!(augment(&g, &m2, &c), Err(MatchingError::StaleCycle));
    }

    #[test]
    fn validate_reports() {
        let g = two_by_two();
        let r = validate(&g, &diagonal(&g));
        assert!(r.perfect && r.violations.is_empty());

        let broken = Matching::from_raw_parts(vec![Some(0), Some(1)], vec![Some(1), Some(1)], vec![1.0, 1.0], vec![1.0, 1.0]);
        let r = validate(&g, &broken);
        assert!(!r.perfect);
        assert!(r.violations.contains(&Violation::Involution { row: 0, col: 0 }));

        let sparse = BipartiteGraph::from_edges(2, [(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let off = Matching::from_raw_parts(vec![Some(1), Some(0)], vec![Some(1), Some(0)], vec![2.0, 3.0], vec![3.0, 2.0]);
        let r = validate(&sparse, &off);
        assert!(r.violations.contains(&Violation::NonEdge { row: 0, col: 1 }));

        let stale_cache = Matching::from_raw_parts(vec![Some(0), Some(1)], vec![Some(0), Some(1)], vec![9.0, 1.0], vec![9.0, 1.0]);
        let r = validate(&g, &stale_cache);
        assert!(matches!(r.violations[0], Violation::CacheMismatch { row: 0, col: 0, .. }));
        assert!(matches!(matching_weight(&g, &stale_cache), Err(MatchingError::Invalid(_))));
    }

    #[test]
    fn permutation_format() {
        let g = two_by_two();
        let m = Matching::from_pairs(&g, [(1, 0), (0, 1)]).unwrap();
        assert_eq!(m.format_permutation().unwrap(), "2\n1\n");
        assert!(Matching::empty(2).format_permutation().is_err());
    }
}
