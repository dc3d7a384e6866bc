//! The generational loop: evaluate, rank, truncate by gap, refill through
//! tournament-selected crossover, mutation and cloning.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Hyperparameters, ValidationReport};
use crate::fitness::{FitnessEngine, QTable};
use crate::program::Program;
use crate::rng::{evaluation_stream, stream_from_seed};
use crate::scalar::Scalar;
use crate::stats::GenerationStats;
use crate::variation::{crossover, generate_program, mutate};

/// Parent-selection tournament size.
pub const TOURNAMENT_SIZE: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Individual<T> {
    pub program: Program<T>,
    /// `None` until evaluated.
    pub fitness: Option<f64>,
    /// Present only for Q-learning runs.
    pub q_table: Option<QTable<T>>,
}

impl<T: Scalar> Individual<T> {
    /// Unevaluated individual; carries a zeroed Q-table when `h` has Q-learning
    /// parameters.
    pub fn new(program: Program<T>, h: &Hyperparameters) -> Self {
        let q_table = h
            .q_params
            .as_ref()
            .map(|q| QTable::new(program.dims.n_registers(), program.dims.n_actions, q));
        Self {
            program,
            fitness: None,
            q_table,
        }
    }

    fn ranking_key(&self) -> f64 {
        self.fitness.unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population<T> {
    pub individuals: Vec<Individual<T>>,
}

impl<T: Scalar> Population<T> {
    pub fn new(individuals: Vec<Individual<T>>) -> Self {
        Self { individuals }
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Individual<T>> {
        self.individuals.iter()
    }

    /// Fitness values in population order; `None` if any is unevaluated.
    pub fn fitnesses(&self) -> Option<Vec<f64>> {
        self.individuals.iter().map(|i| i.fitness).collect()
    }

    /// First individual with the highest fitness.
    pub fn best(&self) -> Option<&Individual<T>> {
        let mut best: Option<&Individual<T>> = None;
        for ind in &self.individuals {
            if best.is_none_or(|b| ind.ranking_key() > b.ranking_key()) {
                best = Some(ind);
            }
        }
        best
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(ValidationReport),
    #[error("individual {index} has not been evaluated")]
    Unevaluated { index: usize },
    #[error("population is empty")]
    EmptyPopulation,
}

pub fn initialize_population<T: Scalar, R: Rng + ?Sized>(h: &Hyperparameters, rng: &mut R) -> Population<T> {
    let individuals = (0..h.population_size)
        .map(|_| Individual::new(generate_program(h, rng), h))
        .collect();
    Population::new(individuals)
}

/// Stable sort by fitness, best first.
pub fn rank<T: Scalar>(mut population: Population<T>) -> Result<Population<T>, EngineError> {
    if let Some(index) = population.individuals.iter().position(|i| i.fitness.is_none()) {
        return Err(EngineError::Unevaluated { index });
    }
    population
        .individuals
        .sort_by(|a, b| b.ranking_key().total_cmp(&a.ranking_key()));
    Ok(population)
}

/// Number of individuals dropped from a population of `size` at `gap`:
/// `floor(gap * size)`.
pub fn removal_count(size: usize, gap: f64) -> usize {
    // Guards products like 0.29 * 100 = 28.999999999999996 against flooring low.
    ((gap * size as f64) + 1e-9).floor().clamp(0.0, size as f64) as usize
}

/// Drops the worst `floor(gap * len)` individuals of a ranked population.
pub fn survive<T: Scalar>(mut population: Population<T>, gap: f64) -> Population<T> {
    let keep = population.len() - removal_count(population.len(), gap);
    population.individuals.truncate(keep);
    population
}

/// Draws `k` individuals uniformly with replacement and returns the fittest,
/// the earliest draw winning ties.
pub fn tournament_select<'a, T: Scalar, R: Rng + ?Sized>(
    population: &'a Population<T>,
    k: usize,
    rng: &mut R,
) -> Result<&'a Individual<T>, EngineError> {
    if population.is_empty() {
        return Err(EngineError::EmptyPopulation);
    }
    let n = population.len();
    let mut winner = &population.individuals[rng.random_range(0..n)];
    for _ in 1..k {
        let challenger = &population.individuals[rng.random_range(0..n)];
        if challenger.ranking_key() > winner.ranking_key() {
            winner = challenger;
        }
    }
    Ok(winner)
}

/// How `deficit` replacement slots are split between the operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OffspringCounts {
    pub crossover: usize,
    pub mutation: usize,
    pub clone: usize,
}

/// Crossover and mutation shares rounded half-up, capped so the total never
/// exceeds `deficit`; the remainder is cloned.
pub fn offspring_counts(deficit: usize, crossover_percent: f64, mutation_percent: f64) -> OffspringCounts {
    let share = |p: f64| (p * deficit as f64 + 0.5).floor() as usize;
    let crossover = share(crossover_percent).min(deficit);
    let mutation = share(mutation_percent).min(deficit - crossover);
    OffspringCounts {
        crossover,
        mutation,
        clone: deficit - crossover - mutation,
    }
}

/// Refills ranked survivors up to `h.population_size` with unevaluated
/// offspring (crossover children, then mutants, then clones).
pub fn variation<T: Scalar, R: Rng + ?Sized>(
    survivors: Population<T>,
    h: &Hyperparameters,
    rng: &mut R,
) -> Result<Population<T>, EngineError> {
    if survivors.is_empty() {
        return Err(EngineError::EmptyPopulation);
    }
    let deficit = h.population_size.saturating_sub(survivors.len());
    let counts = offspring_counts(deficit, h.crossover_percent, h.mutation_percent);
    let mut offspring = Vec::with_capacity(deficit);
    for _ in 0..counts.crossover {
        let a = tournament_select(&survivors, TOURNAMENT_SIZE, rng)?;
        let b = tournament_select(&survivors, TOURNAMENT_SIZE, rng)?;
        offspring.push(Individual::new(crossover(&a.program, &b.program, rng), h));
    }
    for _ in 0..counts.mutation {
        let parent = tournament_select(&survivors, TOURNAMENT_SIZE, rng)?;
        offspring.push(Individual::new(mutate(&parent.program, rng), h));
    }
    for _ in 0..counts.clone {
        let parent = tournament_select(&survivors, TOURNAMENT_SIZE, rng)?;
        offspring.push(Individual::new(parent.program.clone(), h));
    }
    let mut population = survivors;
    population.individuals.extend(offspring);
    Ok(population)
}

/// Scores every individual that needs it. Each individual draws from its own
/// stream derived from `(run_seed, generation, index)`, so serial and parallel
/// schedules agree bit for bit.
pub fn evaluate<T, F>(
    population: &mut Population<T>,
    engine: &F,
    h: &Hyperparameters,
    run_seed: u64,
    generation: usize,
    parallel: bool,
) where
    T: Scalar,
    F: FitnessEngine<T> + ?Sized,
{
    let stochastic = engine.is_stochastic();
    let score = |(index, individual): (usize, &mut Individual<T>)| {
        if individual.fitness.is_some() && !stochastic {
            return;
        }
        let mut rng = evaluation_stream(run_seed, generation, index);
        let fitness = engine.evaluate(individual, &mut rng);
        individual.fitness = Some(if fitness.is_finite() {
            fitness
        } else {
            h.default_fitness
        });
    };
    if parallel {
        population.individuals.par_iter_mut().enumerate().for_each(score);
    } else {
        population.individuals.iter_mut().enumerate().for_each(score);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvolveOptions {
    /// Evaluate individuals on the rayon thread pool.
    pub parallel: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { parallel: true }
    }
}

/// Runs `h.n_generations` generations from `seed`. Every generation,
/// including the last, is evaluated and ranked; the returned population is
/// the ranked final generation. The series has one row per generation.
pub fn evolve<T, F>(
    h: &Hyperparameters,
    engine: &F,
    seed: u64,
) -> Result<(Population<T>, Vec<GenerationStats>), EngineError>
where
    T: Scalar,
    F: FitnessEngine<T> + ?Sized,
{
    evolve_with(h, engine, seed, EvolveOptions::default(), |_, _| {})
}

/// [`evolve`] with an observer called on each ranked generation.
pub fn evolve_with<T, F, C>(
    h: &Hyperparameters,
    engine: &F,
    seed: u64,
    options: EvolveOptions,
    mut on_generation: C,
) -> Result<(Population<T>, Vec<GenerationStats>), EngineError>
where
    T: Scalar,
    F: FitnessEngine<T> + ?Sized,
    C: FnMut(usize, &Population<T>),
{
    let report = h.validate();
    if !report.is_clean() {
        return Err(EngineError::InvalidConfig(report));
    }
    if h.population_size == 0 {
        return Err(EngineError::EmptyPopulation);
    }
    let mut rng = stream_from_seed(seed);
    let mut population = initialize_population(h, &mut rng);
    let mut series = Vec::with_capacity(h.n_generations);

    if h.n_generations == 0 {
        evaluate(&mut population, engine, h, seed, 0, options.parallel);
        return Ok((rank(population)?, series));
    }

    for generation in 0..h.n_generations {
        evaluate(&mut population, engine, h, seed, generation, options.parallel);
        population = rank(population)?;
        let fitnesses = population.fitnesses().expect("ranked population is evaluated");
        series.push(GenerationStats::from_values(generation, &fitnesses).expect("non-empty population"));
        on_generation(generation, &population);
        if generation + 1 < h.n_generations {
            population = variation(survive(population, h.gap), h, &mut rng)?;
        }
    }
    Ok((population, series))
}
