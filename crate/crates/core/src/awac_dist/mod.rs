//! Bulk-synchronous simulation of distributed augmenting-cycle rounds on a
//! square process grid.
//!
//! Every round runs four steps. In each step all processes compute
//! independently (optionally on a worker pool), then the produced messages
//! are delivered to their destination inboxes in a fixed order, then the
//! next step starts. Selection never depends on scheduling, so results are
//! identical for any worker count.

mod layout;
mod messages;
mod process;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{BipartiteGraph, Cycle4, Matching, MatchingError};

pub use layout::{Coords, Layout};
pub use messages::{ARequest, CycleRequest, Envelope, MateUpdate, StepMessage};
pub use process::{Inboxes, SimProcess};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("grid dimension {q} exceeds graph size {n}")]
    GridTooLarge { q: usize, n: usize },
    #[error("grid dimension must be at least 1")]
    EmptyGrid,
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error("applied cycles share {vertex}")]
    ConflictDetected { vertex: String },
    #[error("process {coords:?} disagrees with the global matching at {what}")]
    Inconsistent { coords: Coords, what: String },
    #[error("could not start worker pool: {0}")]
    WorkerPool(String),
}

/// Messages produced by one step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepCounts {
    pub sent: usize,
    /// Largest number received by a single process.
    pub max_received: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RoundStats {
    pub a_requests: usize,
    pub b_requests: usize,
    pub c_requests: usize,
    pub d_updates: usize,
    pub max_a_received: usize,
    pub cycles_applied: usize,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub stats: RoundStats,
    pub applied: Vec<Cycle4>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DistStats {
    pub grid_dim: usize,
    pub seed: Option<u64>,
    pub rounds: Vec<RoundStats>,
    pub cycles_applied: usize,
    pub total_gain: f64,
    /// Stopped because Step B found nothing, not because of the round cap.
    pub converged: bool,
    /// Rounds where cycles were found but every one was dropped.
    pub stalled_rounds: usize,
}

pub struct ProcessGrid {
    layout: Arc<Layout>,
    processes: Vec<SimProcess>,
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for ProcessGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProcessGrid")
            .field("n", &self.layout.n())
            .field("q", &self.layout.q())
            .field("workers", &self.pool.as_ref().map_or(1, |p| p.current_num_threads()))
            .finish()
    }
}

impl ProcessGrid {
    /// Distributes `g` and the perfect matching `m` over a `q x q` grid.
    /// With a seed, rows are shuffled before blocking.
    pub fn partition(g: &BipartiteGraph, m: &Matching, q: usize, seed: Option<u64>) -> Result<Self, DistError> {
        let n = g.n();
        if q == 0 {
            return Err(DistError::EmptyGrid);
        }
        if q > n {
            return Err(DistError::GridTooLarge { q, n });
        }
        if m.n() != n {
            return Err(MatchingError::SizeMismatch { matching: m.n(), graph: n }.into());
        }
        if !m.is_perfect() {
            return Err(MatchingError::NotPerfect.into());
        }
        let layout = Arc::new(Layout::new(n, q, seed));

        let mut adj: Vec<Vec<Vec<(usize, f64)>>> = (0..q * q)
            .map(|p| vec![Vec::new(); layout.block_range(p % q).len()])
            .collect();
        for (i, j, w) in g.edges() {
            let p = layout.index(layout.owner(i, j));
            adj[p][layout.local_col(j)].push((i, w));
        }

        let mut processes = Vec::with_capacity(q * q);
        for (p, block) in adj.into_iter().enumerate() {
            let (a, b) = (p / q, p % q);
            let rows = layout.rows_of_block(a);
            let row_slice = (
                rows.iter().map(|&i| m.mate_of_row(i).expect("perfect")).collect(),
                rows.iter().map(|&i| m.row_weight(i)).collect(),
            );
            let cols = layout.block_range(b);
            let col_slice = (
                cols.clone().map(|j| m.mate_of_col(j).expect("perfect")).collect(),
                cols.map(|j| m.col_weight(j)).collect(),
            );
            processes.push(SimProcess::new((a, b), Arc::clone(&layout), block, row_slice, col_slice));
        }
        Ok(ProcessGrid { layout, processes, pool: None })
    }

    /// Runs compute phases on `workers` threads (1 = in the caller).
    pub fn with_workers(mut self, workers: usize) -> Result<Self, DistError> {
        self.pool = if workers <= 1 {
            None
        } else {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| DistError::WorkerPool(e.to_string()))?,
            )
        };
        Ok(self)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn q(&self) -> usize {
        self.layout.q()
    }

    pub fn process(&self, (a, b): Coords) -> &SimProcess {
        &self.processes[a * self.q() + b]
    }

    pub fn processes(&self) -> &[SimProcess] {
        &self.processes
    }

    fn compute<T, F>(&mut self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut SimProcess) -> T + Sync + Send,
    {
        match &self.pool {
            None => self.processes.iter_mut().map(f).collect(),
            Some(pool) => {
                let procs = &mut self.processes;
                pool.install(|| procs.par_iter_mut().map(f).collect())
            }
        }
    }

    /// Delivers messages in source-process order, as one atomic exchange.
    fn deliver(&mut self, outgoing: Vec<Vec<Envelope>>) -> StepCounts {
        let mut received = vec![0usize; self.processes.len()];
        let mut sent = 0;
        for env in outgoing.into_iter().flatten() {
            let p = self.layout.index(env.dst);
            received[p] += 1;
            sent += 1;
            let inbox = &mut self.processes[p].inbox;
            match env.msg {
                StepMessage::A(r) => inbox.a.push(r),
                StepMessage::B(r) => inbox.b.push(r),
                StepMessage::C(r) => inbox.c.push(r),
                StepMessage::D(u) => inbox.d.push(u),
            }
        }
        StepCounts { sent, max_received: received.into_iter().max().unwrap_or(0) }
    }

    pub fn step_a(&mut self) -> StepCounts {
        let out = self.compute(SimProcess::step_a);
        self.deliver(out)
    }

    pub fn step_b(&mut self) -> StepCounts {
        let out = self.compute(SimProcess::step_b);
        self.deliver(out)
    }

    pub fn step_c(&mut self) -> StepCounts {
        let out = self.compute(SimProcess::step_c);
        self.deliver(out)
    }

    /// Applies the surviving cycles and broadcasts the new mates. Returns
    /// the applied cycles and the number of update messages.
    pub fn step_d(&mut self) -> Result<(Vec<Cycle4>, StepCounts), DistError> {
        let results = self.compute(SimProcess::step_d);
        let (out, applied): (Vec<_>, Vec<_>) = results.into_iter().unzip();
        let applied: Vec<Cycle4> = applied.into_iter().flatten().collect();
        check_disjoint(self.layout.n(), &applied)?;
        let counts = self.deliver(out);
        self.compute(SimProcess::apply_updates);
        Ok((applied, counts))
    }

    /// One full round of Steps A to D.
    pub fn run_round(&mut self) -> Result<Round, DistError> {
        debug_assert!(self.processes.iter().all(SimProcess::inboxes_empty));
        let a = self.step_a();
        let b = self.step_b();
        let c = self.step_c();
        let (applied, d) = self.step_d()?;
        let stats = RoundStats {
            a_requests: a.sent,
            b_requests: b.sent,
            c_requests: c.sent,
            d_updates: d.sent,
            max_a_received: a.max_received,
            cycles_applied: applied.len(),
            gain: applied.iter().map(|c| c.gain).sum(),
        };
        Ok(Round { stats, applied })
    }

    /// Global matching assembled from the slices of grid column 0 (rows)
    /// and grid row 0 (columns).
    pub fn gather(&self) -> Matching {
        let n = self.layout.n();
        let q = self.q();
        let mut mate_of_row = vec![None; n];
        let mut weight_of_row = vec![0.0; n];
        let mut mate_of_col = vec![None; n];
        let mut weight_of_col = vec![0.0; n];
        for a in 0..q {
            let p = self.process((a, 0));
            for &i in p.rows() {
                let (mate, w) = p.row_slice(i);
                mate_of_row[i] = Some(mate);
                weight_of_row[i] = w;
            }
        }
        for b in 0..q {
            let p = self.process((0, b));
            for j in p.cols() {
                let (mate, w) = p.col_slice(j);
                mate_of_col[j] = Some(mate);
                weight_of_col[j] = w;
            }
        }
        Matching::from_raw_parts(mate_of_row, mate_of_col, weight_of_row, weight_of_col)
    }

    /// Checks that every process's slices agree with `global`.
    pub fn check_consistency(&self, global: &Matching) -> Result<(), DistError> {
        for p in &self.processes {
            for &i in p.rows() {
                if p.row_slice(i) != (global.mate_of_row(i).unwrap_or(usize::MAX), global.row_weight(i)) {
                    return Err(DistError::Inconsistent { coords: p.coords(), what: format!("row {i}") });
                }
            }
            for j in p.cols() {
                if p.col_slice(j) != (global.mate_of_col(j).unwrap_or(usize::MAX), global.col_weight(j)) {
                    return Err(DistError::Inconsistent { coords: p.coords(), what: format!("column {j}") });
                }
            }
        }
        Ok(())
    }
}

fn check_disjoint(n: usize, cycles: &[Cycle4]) -> Result<(), DistError> {
    let mut row_used = vec![false; n];
    let mut col_used = vec![false; n];
    for c in cycles {
        for r in c.rows() {
            if std::mem::replace(&mut row_used[r], true) {
                return Err(DistError::ConflictDetected { vertex: format!("row {r}") });
            }
        }
        for col in c.cols() {
            if std::mem::replace(&mut col_used[col], true) {
                return Err(DistError::ConflictDetected { vertex: format!("column {col}") });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistConfig {
    pub grid_dim: usize,
    pub maxiter: usize,
    /// Row shuffle seed; `None` keeps the natural row order.
    pub seed: Option<u64>,
    pub workers: usize,
}

impl Default for DistConfig {
    fn default() -> Self {
        DistConfig { grid_dim: 1, maxiter: crate::awac_seq::DEFAULT_MAXITER, seed: None, workers: 1 }
    }
}

/// Partitions, runs up to `maxiter` rounds, and gathers the result.
/// Stops early after a round whose Step B found no positive-gain cycle.
pub fn awac_distributed(
    g: &BipartiteGraph,
    m: &Matching,
    config: &DistConfig,
) -> Result<(Matching, DistStats), DistError> {
    let mut grid = ProcessGrid::partition(g, m, config.grid_dim, config.seed)?.with_workers(config.workers)?;
    let mut stats = DistStats { grid_dim: config.grid_dim, seed: config.seed, ..DistStats::default() };
    for _ in 0..config.maxiter {
        let round = grid.run_round()?;
        let found = round.stats.b_requests;
        stats.cycles_applied += round.stats.cycles_applied;
        stats.total_gain += round.stats.gain;
        if found > 0 && round.stats.cycles_applied == 0 {
            stats.stalled_rounds += 1;
        }
        stats.rounds.push(round.stats);
        if found == 0 {
            stats.converged = true;
            break;
        }
    }
    Ok((grid.gather(), stats))
}
