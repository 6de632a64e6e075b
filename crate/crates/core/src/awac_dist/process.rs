use std::sync::Arc;

use crate::graph::Cycle4;

use super::layout::{Coords, Layout};
use super::messages::{ARequest, CycleRequest, Envelope, MateUpdate, StepMessage};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Inboxes {
    pub a: Vec<ARequest>,
    pub b: Vec<CycleRequest>,
    pub c: Vec<CycleRequest>,
    pub d: Vec<MateUpdate>,
}

impl Inboxes {
    pub fn is_empty(&self) -> bool {
        self.a.is_empty() && self.b.is_empty() && self.c.is_empty() && self.d.is_empty()
    }
}

/// One simulated process: a 2D block of the graph plus replicated mate
/// slices for the rows of its grid row and the columns of its grid column.
#[derive(Debug, Clone)]
pub struct SimProcess {
    coords: Coords,
    layout: Arc<Layout>,
    /// Per local column: `(global row, weight)` sorted by row.
    adj: Vec<Vec<(usize, f64)>>,
    row_mate: Vec<usize>,
    row_weight: Vec<f64>,
    col_mate: Vec<usize>,
    col_weight: Vec<f64>,
    /// Per local row: a C-request left for matched edge `(row, mate)`.
    sent_c: Vec<bool>,
    pub(crate) inbox: Inboxes,
}

impl SimProcess {
    pub(crate) fn new(
        coords: Coords,
        layout: Arc<Layout>,
        adj: Vec<Vec<(usize, f64)>>,
        row_slice: (Vec<usize>, Vec<f64>),
        col_slice: (Vec<usize>, Vec<f64>),
    ) -> Self {
        let sent_c = vec![false; row_slice.0.len()];
        SimProcess {
            coords,
            layout,
            adj,
            row_mate: row_slice.0,
            row_weight: row_slice.1,
            col_mate: col_slice.0,
            col_weight: col_slice.1,
            sent_c,
            inbox: Inboxes::default(),
        }
    }

    pub fn coords(&self) -> Coords {
        self.coords
    }

    pub fn nnz(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// Global rows whose mate slice this process holds.
    pub fn rows(&self) -> &[usize] {
        self.layout.rows_of_block(self.coords.0)
    }

    /// Global columns whose mate slice this process holds.
    pub fn cols(&self) -> std::ops::Range<usize> {
        self.layout.block_range(self.coords.1)
    }

    /// Replicated `(m_i, w(i, m_i))` for global row `i`.
    pub fn row_slice(&self, i: usize) -> (usize, f64) {
        let k = self.layout.local_row(i);
        (self.row_mate[k], self.row_weight[k])
    }

    /// Replicated `(m_j, w(m_j, j))` for global column `j`.
    pub fn col_slice(&self, j: usize) -> (usize, f64) {
        let k = self.layout.local_col(j);
        (self.col_mate[k], self.col_weight[k])
    }

    pub fn inboxes_empty(&self) -> bool {
        self.inbox.is_empty()
    }

    fn local_weight(&self, i: usize, j: usize) -> Option<f64> {
        let list = &self.adj[self.layout.local_col(j)];
        list.binary_search_by(|&(r, _)| r.cmp(&i)).ok().map(|k| list[k].1)
    }

    fn send(&self, dst: Coords, msg: StepMessage) -> Envelope {
        Envelope { src: self.coords, dst, msg }
    }

    /// Cycle requests: for each local edge `(i, j)` with `i > m_j`, ask the
    /// owner of `(m_j, m_i)` to close the cycle.
    pub(crate) fn step_a(&mut self) -> Vec<Envelope> {
        let mut out = Vec::new();
        for (lc, list) in self.adj.iter().enumerate() {
            let mj = self.col_mate[lc];
            let first = list.partition_point(|&(i, _)| i <= mj);
            for &(i, w_ij) in &list[first..] {
                let mi = self.row_mate[self.layout.local_row(i)];
                let req = ARequest { mj, mi, w_ij };
                out.push(self.send(self.layout.owner(mj, mi), StepMessage::A(req)));
            }
        }
        out
    }

    /// Cycle completion: check `(m_j, m_i)` locally, evaluate the gain from
    /// replicated matched weights, and forward positive cycles to the owner
    /// of matched edge `(m_j, j)`.
    pub(crate) fn step_b(&mut self) -> Vec<Envelope> {
        let requests = std::mem::take(&mut self.inbox.a);
        let mut out = Vec::new();
        for req in requests {
            let Some(w_close) = self.local_weight(req.mj, req.mi) else {
                continue;
            };
            let (j, w_mj_j) = self.row_slice(req.mj);
            let (i, w_i_mi) = self.col_slice(req.mi);
            let gain = req.w_ij + w_close - w_i_mi - w_mj_j;
            if gain > 0.0 {
                let cycle = CycleRequest { i, j, mj: req.mj, mi: req.mi, gain, w_ij: req.w_ij, w_close };
                let dst = (self.coords.0, self.layout.col_block(j));
                out.push(self.send(dst, StepMessage::B(cycle)));
            }
        }
        out
    }

    /// Local comparison: one survivor per matched edge `(m_j, j)`, forwarded
    /// to the owner of matched edge `(i, m_i)`.
    pub(crate) fn step_c(&mut self) -> Vec<Envelope> {
        let requests = std::mem::take(&mut self.inbox.b);
        let best = self.best_per_row(requests, |r| r.mj);
        let mut out = Vec::new();
        for (k, req) in best.into_iter().enumerate() {
            if let Some(req) = req {
                self.sent_c[k] = true;
                out.push(self.send(self.layout.owner(req.i, req.mi), StepMessage::C(req)));
            }
        }
        out
    }

    /// Nonlocal comparison: one survivor per matched edge `(i, m_i)`, unless
    /// that edge already carries a C-request as some cycle's `(m_j, j)`.
    /// Survivors are applied and their new mates broadcast along the grid
    /// rows and columns that replicate them.
    pub(crate) fn step_d(&mut self) -> (Vec<Envelope>, Vec<Cycle4>) {
        let requests: Vec<CycleRequest> = std::mem::take(&mut self.inbox.c)
            .into_iter()
            .filter(|r| !self.sent_c[self.layout.local_row(r.i)])
            .collect();
        let best = self.best_per_row(requests, |r| r.i);
        self.sent_c.iter_mut().for_each(|f| *f = false);

        let q = self.layout.q();
        let mut out = Vec::new();
        let mut applied = Vec::new();
        for req in best.into_iter().flatten() {
            let updates = [
                MateUpdate::Row { row: req.i, mate: req.j, weight: req.w_ij },
                MateUpdate::Col { col: req.j, mate: req.i, weight: req.w_ij },
                MateUpdate::Row { row: req.mj, mate: req.mi, weight: req.w_close },
                MateUpdate::Col { col: req.mi, mate: req.mj, weight: req.w_close },
            ];
            for u in updates {
                match u {
                    MateUpdate::Row { row, .. } => {
                        let a = self.layout.row_block(row);
                        out.extend((0..q).map(|b| self.send((a, b), StepMessage::D(u))));
                    }
                    MateUpdate::Col { col, .. } => {
                        let b = self.layout.col_block(col);
                        out.extend((0..q).map(|a| self.send((a, b), StepMessage::D(u))));
                    }
                }
            }
            applied.push(req.cycle());
        }
        (out, applied)
    }

    /// Applies delivered mate updates to the replicated slices.
    pub(crate) fn apply_updates(&mut self) {
        for u in std::mem::take(&mut self.inbox.d) {
            match u {
                MateUpdate::Row { row, mate, weight } => {
                    debug_assert_eq!(self.layout.row_block(row), self.coords.0);
                    let k = self.layout.local_row(row);
                    self.row_mate[k] = mate;
                    self.row_weight[k] = weight;
                }
                MateUpdate::Col { col, mate, weight } => {
                    debug_assert_eq!(self.layout.col_block(col), self.coords.1);
                    let k = self.layout.local_col(col);
                    self.col_mate[k] = mate;
                    self.col_weight[k] = weight;
                }
            }
        }
    }

    /// Best request per local row, keyed by `row_of`.
    fn best_per_row(
        &self,
        requests: Vec<CycleRequest>,
        row_of: impl Fn(&CycleRequest) -> usize,
    ) -> Vec<Option<CycleRequest>> {
        let mut best: Vec<Option<CycleRequest>> = vec![None; self.row_mate.len()];
        for req in requests {
            let k = self.layout.local_row(row_of(&req));
            if best[k].is_none_or(|b| req.beats(&b)) {
                best[k] = Some(req);
            }
        }
        best
    }
}
