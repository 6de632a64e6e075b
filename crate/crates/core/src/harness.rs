//! End-to-end pipeline, run report, and static-pivoting artifacts.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::awac_dist::{awac_distributed, DistConfig, DistError, RoundStats};
use crate::awac_seq::{awac_sequential, DEFAULT_MAXITER};
use crate::graph::{matching_weight, BipartiteGraph, GraphError, Matching, MatchingError};
use crate::matching_init::{greedy_maximal, maximum_cardinality, InitError};
use crate::matrix_io::{apply_metric, equilibrate, load_matrix_market, MatrixError, Scaling, SparseMatrix, WeightMetric};
use crate::oracle_exact::{exact_mwpm, OracleError};

pub const DEFAULT_ORACLE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Seq,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    /// Run when `n` is at most the configured limit.
    #[default]
    Auto,
    On,
    Off,
}

/// Everything that controls a run except where the matrix comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSettings {
    pub engine: Engine,
    pub grid_dim: usize,
    pub metric: WeightMetric,
    pub maxiter: usize,
    pub seed: u64,
    pub oracle: OracleMode,
    pub oracle_limit: usize,
    pub workers: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            engine: Engine::Seq,
            grid_dim: 1,
            metric: WeightMetric::Sum,
            maxiter: DEFAULT_MAXITER,
            seed: 1,
            oracle: OracleMode::Auto,
            oracle_limit: DEFAULT_ORACLE_LIMIT,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub input: PathBuf,
    pub settings: RunSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Load,
    Equilibrate,
    Graph,
    GreedyMaximal,
    MaximumCardinality,
    Awac,
    Oracle,
    Emit,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Load => "load",
            Phase::Equilibrate => "equilibrate",
            Phase::Graph => "graph",
            Phase::GreedyMaximal => "greedy_maximal",
            Phase::MaximumCardinality => "maximum_cardinality",
            Phase::Awac => "awac",
            Phase::Oracle => "oracle",
            Phase::Emit => "emit",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Init(#[from] InitError),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
#[error("phase {phase}: {source}")]
pub struct PipelineError {
    pub phase: Phase,
    #[source]
    pub source: StageError,
}

impl PipelineError {
    fn at(phase: Phase) -> impl FnOnce(StageError) -> PipelineError {
        move |source| PipelineError { phase, source }
    }

    /// 2 structural singularity, 3 unreadable input, 4 bad configuration,
    /// 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match &self.source {
            StageError::Init(InitError::StructurallySingular { .. })
            | StageError::Matrix(MatrixError::EmptyRowOrColumn { .. }) => 2,
            StageError::Matrix(_) if self.phase == Phase::Load => 3,
            StageError::Io(_) if self.phase == Phase::Load => 3,
            StageError::Graph(GraphError::NotSquare { .. })
            | StageError::Dist(DistError::GridTooLarge { .. } | DistError::EmptyGrid) => 4,
            _ => 1,
        }
    }
}

fn stage<T, E: Into<StageError>>(phase: Phase, r: Result<T, E>) -> Result<T, PipelineError> {
    r.map_err(|e| PipelineError::at(phase)(e.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub optimum_weight: f64,
    /// Optimum minus final weight.
    pub weight_gap: f64,
}

/// Phase wall times in milliseconds. File I/O is counted only in `load_ms`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub load_ms: f64,
    pub equilibrate_ms: f64,
    pub init_ms: f64,
    pub awac_ms: f64,
    pub oracle_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub input: String,
    pub n: usize,
    pub nnz: usize,
    pub engine: Engine,
    pub metric: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_dim: Option<usize>,
    pub maxiter: usize,
    pub seed: u64,
    pub cardinality: usize,
    pub greedy_cardinality: usize,
    pub initial_weight: f64,
    pub final_weight: f64,
    /// Sequential iterations that applied a cycle, or grid rounds run.
    pub iterations: usize,
    pub cycles_applied: usize,
    pub total_gain: f64,
    pub converged: bool,
    /// Final over optimal weight; present only for sum-metric runs with the oracle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approx_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<Vec<RoundStats>>,
    #[serde(skip_serializing)]
    pub timings: Timings,
}

impl Report {
    /// TOML text without timings; stable for identical inputs.
    pub fn render(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }

    /// [`render`](Self::render) followed by a `[timings]` table.
    pub fn render_with_timings(&self) -> String {
        #[derive(Serialize)]
        struct T<'a> {
            timings: &'a Timings,
        }
        let mut out = self.render();
        out.push('\n');
        out.push_str(&toml::to_string(&T { timings: &self.timings }).expect("timings serialize"));
        out
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: Report,
    pub graph: BipartiteGraph,
    pub matching: Matching,
    pub scaling: Scaling,
}

pub fn run_pipeline(config: &Config) -> Result<PipelineOutput, PipelineError> {
    let t = Instant::now();
    let a = stage(Phase::Load, load_matrix_market(&config.input))?;
    let load_ms = ms(t);
    let mut out = run_matrix(&a, &config.settings, &config.input.display().to_string())?;
    out.report.timings.load_ms = load_ms;
    Ok(out)
}

/// Runs everything after loading on an in-memory matrix.
pub fn run_matrix(a: &SparseMatrix, settings: &RunSettings, label: &str) -> Result<PipelineOutput, PipelineError> {
    let mut timings = Timings::default();

    let t = Instant::now();
    let (b, scaling) = stage(Phase::Equilibrate, equilibrate(a))?;
    let weights = apply_metric(&b, settings.metric);
    timings.equilibrate_ms = ms(t);
    let g = stage(Phase::Graph, BipartiteGraph::from_matrix(&weights))?;

    let t = Instant::now();
    let greedy = greedy_maximal(&g);
    let greedy_cardinality = greedy.cardinality();
    let initial = stage(Phase::MaximumCardinality, maximum_cardinality(&g, &greedy))?;
    timings.init_ms = ms(t);
    let initial_weight = stage(Phase::MaximumCardinality, matching_weight(&g, &initial))?;

    let t = Instant::now();
    let (matching, iterations, cycles_applied, total_gain, converged, rounds) = match settings.engine {
        Engine::Seq => {
            let (m, s) = stage(Phase::Awac, awac_sequential(&g, &initial, settings.maxiter))?;
            (m, s.iterations, s.cycles_applied, s.total_gain, s.converged, None)
        }
        Engine::Grid => {
            let dist = DistConfig {
                grid_dim: settings.grid_dim,
                maxiter: settings.maxiter,
                seed: Some(settings.seed),
                workers: settings.workers,
            };
            let (m, s) = stage(Phase::Awac, awac_distributed(&g, &initial, &dist))?;
            (m, s.rounds.len(), s.cycles_applied, s.total_gain, s.converged, Some(s.rounds))
        }
    };
    timings.awac_ms = ms(t);
    let final_weight = stage(Phase::Awac, matching_weight(&g, &matching))?;

    let run_oracle = match settings.oracle {
        OracleMode::On => true,
        OracleMode::Off => false,
        OracleMode::Auto => g.n() <= settings.oracle_limit,
    };
    let (oracle, approx_ratio) = if run_oracle {
        let t = Instant::now();
        let exact = stage(Phase::Oracle, exact_mwpm(&g))?;
        timings.oracle_ms = ms(t);
        let ratio = match settings.metric {
            WeightMetric::Sum if exact.weight > 0.0 => Some(final_weight / exact.weight),
            _ => None,
        };
        let summary = OracleSummary { optimum_weight: exact.weight, weight_gap: exact.weight - final_weight };
        (Some(summary), ratio)
    } else {
        (None, None)
    };

    let report = Report {
        input: label.to_string(),
        n: g.n(),
        nnz: g.m(),
        engine: settings.engine,
        metric: settings.metric.as_str(),
        grid_dim: (settings.engine == Engine::Grid).then_some(settings.grid_dim),
        maxiter: settings.maxiter,
        seed: settings.seed,
        cardinality: matching.cardinality(),
        greedy_cardinality,
        initial_weight,
        final_weight,
        iterations,
        cycles_applied,
        total_gain,
        converged,
        approx_ratio,
        oracle,
        rounds,
        timings,
    };
    Ok(PipelineOutput { report, graph: g, matching, scaling })
}

/// Writes `permutation.txt`, `row_scaling.txt`, `col_scaling.txt` and
/// `report.toml` into `out_dir`.
pub fn emit_artifacts(
    report: &Report,
    matching: &Matching,
    scaling: &Scaling,
    out_dir: impl AsRef<Path>,
) -> Result<(), PipelineError> {
    let dir = out_dir.as_ref();
    let perm = stage(Phase::Emit, matching.format_permutation())?;
    stage(Phase::Emit, fs::create_dir_all(dir))?;
    stage(Phase::Emit, fs::write(dir.join("permutation.txt"), perm))?;
    stage(Phase::Emit, scaling.write_to_dir(dir))?;
    stage(Phase::Emit, fs::write(dir.join("report.toml"), report.render_with_timings()))?;
    Ok(())
}

/// Reads a permutation file back as 0-based rows per column.
pub fn read_permutation(path: impl AsRef<Path>) -> io::Result<Vec<usize>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse::<usize>()
                .ok()
                .and_then(|v| v.checked_sub(1))
                .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, format!("bad permutation entry {l:?}")))
        })
        .collect()
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}
