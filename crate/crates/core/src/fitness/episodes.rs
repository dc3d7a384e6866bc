use std::marker::PhantomData;

use rand::Rng;

use crate::config::Hyperparameters;
use crate::engine::Individual;
use crate::environments::{EnvError, EpisodicEnvironment};
use crate::fitness::FitnessEngine;
use crate::program::Program;
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Plays one episode with the action-register argmax policy and returns the
/// summed reward. The reward of the final (terminal or truncated) step is
/// included.
pub fn run_episode<T, E, R>(
    program: &mut Program<T>,
    env: &mut E,
    external_factor: T,
    rng: &mut R,
) -> Result<f64, EnvError>
where
    T: Scalar,
    E: EpisodicEnvironment<T>,
    R: Rng + ?Sized,
{
    let n_actions = E::N_ACTIONS;
    let mut state = env.reset(rng);
    let mut score = 0.0;
    loop {
        let action = program.execute(state.as_ref(), external_factor).best_action(n_actions);
        let outcome = env.step(action)?;
        score += outcome.reward.as_f64();
        if outcome.is_done() {
            return Ok(score);
        }
        state = outcome.state;
    }
}

fn fits<T: Scalar, E: EpisodicEnvironment<T>>(program: &Program<T>) -> bool {
    program.dims.n_inputs == E::N_INPUTS && program.dims.n_actions == E::N_ACTIONS
}

/// Scores of `h.n_trials` independent episodes, in order.
pub fn episode_scores<T, E, R>(program: &mut Program<T>, h: &Hyperparameters, rng: &mut R) -> Result<Vec<f64>, EnvError>
where
    T: Scalar,
    E: EpisodicEnvironment<T> + Default,
    R: Rng + ?Sized,
{
    let factor = T::of(h.external_factor);
    let mut env = E::default();
    (0..h.n_trials)
        .map(|_| run_episode(program, &mut env, factor, rng))
        .collect()
}

/// Mean episode score over `h.n_trials` episodes, or `h.default_fitness` if
/// the program does not fit the environment or the score is not finite.
pub fn eval_episodes<T, E, R>(program: &mut Program<T>, h: &Hyperparameters, rng: &mut R) -> f64
where
    T: Scalar,
    E: EpisodicEnvironment<T> + Default,
    R: Rng + ?Sized,
{
    if !fits::<T, E>(program) || h.n_trials == 0 {
        return h.default_fitness;
    }
    match episode_scores::<T, E, R>(program, h, rng) {
        Ok(scores) => {
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            if mean.is_finite() {
                mean
            } else {
                h.default_fitness
            }
        }
        Err(_) => h.default_fitness,
    }
}

/// Episodic fitness with the action-register policy.
#[derive(Debug, Clone)]
pub struct EpisodicFitness<E> {
    hyperparameters: Hyperparameters,
    env: PhantomData<fn() -> E>,
}

impl<E> EpisodicFitness<E> {
    pub fn new(h: &Hyperparameters) -> Self {
        Self {
            hyperparameters: h.clone(),
            env: PhantomData,
        }
    }
}

impl<T, E> FitnessEngine<T> for EpisodicFitness<E>
where
    T: Scalar,
    E: EpisodicEnvironment<T> + Default,
{
    fn evaluate(&self, individual: &mut Individual<T>, rng: &mut RngStream) -> f64 {
        eval_episodes::<T, E, _>(&mut individual.program, &self.hyperparameters, rng)
    }

    fn is_stochastic(&self) -> bool {
        true
    }
}
