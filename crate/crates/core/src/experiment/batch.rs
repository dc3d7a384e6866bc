use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentError;
use crate::config::{Hyperparameters, Task};
use crate::engine::{evolve_with, EvolveOptions, Population};
use crate::environments::{bundled_iris, CartPole, MountainCar};
use crate::fitness::{EpisodicFitness, FitnessEngine, IrisFitness, QLearningFitness, QTable};
use crate::program::Program;
use crate::stats::GenerationStats;

/// Metadata written next to every aggregate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub task: Task,
    pub n_experiments: usize,
    pub base_seed: u64,
    pub seeds: Vec<u64>,
    pub config_hash: String,
    pub config: Hyperparameters,
}

/// Per-generation statistics averaged across a batch of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentBatchResult {
    pub rows: Vec<GenerationStats>,
    pub meta: RunMeta,
}

/// The fittest final-generation individual across a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BestProgram {
    pub seed: u64,
    pub fitness: f64,
    pub program: Program<f64>,
    pub q_table: Option<QTable<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub result: ExperimentBatchResult,
    pub best: BestProgram,
    /// Each run's own series, in seed order.
    pub runs: Vec<Vec<GenerationStats>>,
}

/// SHA-256 of the configuration's compact JSON form.
pub fn config_hash(h: &Hyperparameters) -> String {
    let json = serde_json::to_string(h).expect("hyperparameters serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Fitness engine for `task`; Q-learning when `h.q_params` is set.
pub fn build_engine(h: &Hyperparameters, task: Task) -> Result<Box<dyn FitnessEngine<f64>>, ExperimentError> {
    Ok(match (task, h.q_params.is_some()) {
        (Task::Iris, false) => Box::new(IrisFitness::new(bundled_iris(), h)),
        (Task::Iris, true) => {
            return Err(ExperimentError::Unsupported {
                task,
                what: "Q-learning fitness",
            })
        }
        (Task::CartPole, false) => Box::new(EpisodicFitness::<CartPole<f64>>::new(h)),
        (Task::CartPole, true) => Box::new(QLearningFitness::<CartPole<f64>>::new(h)),
        (Task::MountainCar, false) => Box::new(EpisodicFitness::<MountainCar<f64>>::new(h)),
        (Task::MountainCar, true) => Box::new(QLearningFitness::<MountainCar<f64>>::new(h)),
    })
}

/// One evolutionary run of `task` from `seed`.
pub fn evolve_task<C>(
    h: &Hyperparameters,
    task: Task,
    seed: u64,
    options: EvolveOptions,
    on_generation: C,
) -> Result<(Population<f64>, Vec<GenerationStats>), ExperimentError>
where
    C: FnMut(usize, &Population<f64>),
{
    let report = h.validate_for(task);
    if !report.is_clean() {
        return Err(crate::config::ConfigError::Invalid(report).into());
    }
    let engine = build_engine(h, task)?;
    evolve_with(h, engine.as_ref(), seed, options, on_generation)
        .map_err(|source| ExperimentError::Run { seed, source })
}

/// Averages aligned series field by field.
pub fn aggregate(runs: &[Vec<GenerationStats>]) -> Vec<GenerationStats> {
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    let n = runs.len() as f64;
    (0..first.len())
        .map(|g| {
            let avg = |f: fn(&GenerationStats) -> f64| runs.iter().map(|r| f(&r[g])).sum::<f64>() / n;
            let (max, min) = (avg(|s| s.max), avg(|s| s.min));
            GenerationStats {
                generation: first[g].generation,
                max,
                mean: avg(|s| s.mean).clamp(min, max),
                median: avg(|s| s.median).clamp(min, max),
                min,
            }
        })
        .collect()
}

/// Runs `n_experiments` independent evolutions with seeds
/// `base_seed, base_seed + 1, ...` and averages their statistics.
///
/// Runs execute in parallel; results are joined in seed order so the
/// aggregate does not depend on scheduling.
pub fn run_batch(
    h: &Hyperparameters,
    task: Task,
    n_experiments: usize,
    base_seed: u64,
    options: EvolveOptions,
) -> Result<BatchOutcome, ExperimentError> {
    if n_experiments == 0 {
        return Err(ExperimentError::InvalidSpace(
            "at least one experiment is required".into(),
        ));
    }
    let seeds: Vec<u64> = (0..n_experiments as u64).map(|i| base_seed.wrapping_add(i)).collect();
    let run = |&seed: &u64| evolve_task(h, task, seed, options, |_, _| {}).map(|(pop, series)| (seed, pop, series));
    let outcomes: Vec<_> = if options.parallel {
        seeds.par_iter().map(run).collect::<Result<_, _>>()?
    } else {
        seeds.iter().map(run).collect::<Result<_, _>>()?
    };

    let mut best: Option<BestProgram> = None;
    let mut runs = Vec::with_capacity(outcomes.len());
    for (seed, population, series) in outcomes {
        if let Some(top) = population.best() {
            let fitness = top.fitness.unwrap_or(h.default_fitness);
            if best.as_ref().is_none_or(|b| fitness > b.fitness) {
                best = Some(BestProgram {
                    seed,
                    fitness,
                    program: top.program.clone(),
                    q_table: top.q_table.clone(),
                });
            }
        }
        runs.push(series);
    }

    let meta = RunMeta {
        task,
        n_experiments,
        base_seed,
        seeds,
        config_hash: config_hash(h),
        config: h.clone(),
    };
    Ok(BatchOutcome {
        result: ExperimentBatchResult {
            rows: aggregate(&runs),
            meta,
        },
        best: best.expect("population is never empty after a successful run"),
        runs,
    })
}
