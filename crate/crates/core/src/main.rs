use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use awpm::harness::{emit_artifacts, run_pipeline, Config, Engine, OracleMode, RunSettings, DEFAULT_ORACLE_LIMIT};
use awpm::WeightMetric;

const EXIT_CONFIG: u8 = 4;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Seq,
    Grid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Sum,
    Logproduct,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleArg {
    Auto,
    On,
    Off,
}

/// Approximate-weight perfect matching for static pivoting.
#[derive(Debug, Parser)]
#[command(name = "awpm", version)]
struct Cli {
    /// Matrix Market file (coordinate, real, general or symmetric).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "seq")]
    engine: EngineArg,
    /// Process grid dimension q (q x q processes) for the grid engine.
    #[arg(long, default_value_t = 1)]
    grid_dim: usize,
    #[arg(long, value_enum, default_value = "sum")]
    metric: MetricArg,
    /// Maximum augmentation iterations (sequential) or rounds (grid).
    #[arg(long, default_value_t = awpm::awac_seq::DEFAULT_MAXITER)]
    maxiter: usize,
    /// Seed for the grid engine's row permutation.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    oracle: OracleArg,
    /// Largest n for which `--oracle auto` runs the exact solver.
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,
    /// Directory for permutation, scaling, and report files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the grid engine's compute phases.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.grid_dim == 0 || cli.workers == 0 {
        eprintln!("error: --grid-dim and --workers must be at least 1");
        return ExitCode::from(EXIT_CONFIG);
    }

    let config = Config {
        input: cli.input,
        settings: RunSettings {
            engine: match cli.engine {
                EngineArg::Seq => Engine::Seq,
                EngineArg::Grid => Engine::Grid,
            },
            grid_dim: cli.grid_dim,
            metric: match cli.metric {
                MetricArg::Sum => WeightMetric::Sum,
                MetricArg::Logproduct => WeightMetric::LogProduct,
            },
            maxiter: cli.maxiter,
            seed: cli.seed,
            oracle: match cli.oracle {
                OracleArg::Auto => OracleMode::Auto,
                OracleArg::On => OracleMode::On,
                OracleArg::Off => OracleMode::Off,
            },
            oracle_limit: cli.oracle_limit,
            workers: cli.workers,
        },
    };

    let out = match run_pipeline(&config) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(dir) = &cli.out {
        if let Err(e) = emit_artifacts(&out.report, &out.matching, &out.scaling, dir) {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    }
    print!("{}", out.report.render_with_timings());
    ExitCode::SUCCESS
}
