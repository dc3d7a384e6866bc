//! Seeded experiment batches, aggregate CSV tables, SVG plots and random
//! hyperparameter search.

mod batch;
mod csv_io;
mod plot;
mod tune;

use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;
use crate::engine::EngineError;

pub use batch::{
    aggregate, build_engine, config_hash, evolve_task, run_batch, BatchOutcome, BestProgram, ExperimentBatchResult,
    RunMeta,
};
pub use csv_io::{aggregate_to_csv, read_aggregate_csv, render_aggregate_csv, CSV_HEADER};
pub use plot::{emit_plot, render_svg};
pub use tune::{load_space, random_search, ParamRange, SearchSpace, Trial, TuneOutcome};

pub use crate::stats::GenerationStats;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run with seed {seed} failed: {source}")]
    Run {
        seed: u64,
        #[source]
        source: EngineError,
    },
    #[error("{task} does not support {what}")]
    Unsupported {
        task: crate::config::Task,
        what: &'static str,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed aggregate table: {0}")]
    Table(String),
    #[error("nothing to plot: the series is empty")]
    EmptySeries,
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
}
