use std::marker::PhantomData;

use rand::Rng;

use crate::config::Hyperparameters;
use crate::engine::Individual;
use crate::environments::{EnvError, EpisodicEnvironment};
use crate::fitness::{FitnessEngine, QTable};
use crate::program::Program;
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Epsilon-greedy register/action selection.
///
/// Runs the program on `state`; the winning register is the argmax over the
/// whole register file and the action is the argmax of its Q row. With
/// probability `q.epsilon` the action is replaced by a uniform random one.
/// Ties resolve to the lowest index.
pub fn greedy_selection<T, R>(
    program: &mut Program<T>,
    q: &QTable<T>,
    state: &[T],
    external_factor: T,
    rng: &mut R,
) -> (usize, usize)
where
    T: Scalar,
    R: Rng + ?Sized,
{
    let register = program.execute(state, external_factor).winning_register();
    let mut action = q.greedy_action(register);
    if rng.random::<f64>() < q.epsilon.as_f64() {
        action = rng.random_range(0..q.n_actions());
    }
    (register, action)
}

/// Observable steps of a Q-learning episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QEvent<T> {
    Selected {
        register: usize,
        action: usize,
    },
    Updated {
        state: usize,
        action: usize,
        reward: T,
        next_state: usize,
    },
    EpisodeEnd {
        score: f64,
    },
}

/// Plays one episode, learning online, then decays alpha and epsilon once.
///
/// After each non-final step the next register/action pair is selected; the
/// table is updated with the reward of that step only when the winning
/// register changed. The final transition triggers no update.
pub fn run_q_episode<T, E, R, F>(
    program: &mut Program<T>,
    q: &mut QTable<T>,
    env: &mut E,
    external_factor: T,
    rng: &mut R,
    mut observe: F,
) -> Result<f64, EnvError>
where
    T: Scalar,
    E: EpisodicEnvironment<T>,
    R: Rng + ?Sized,
    F: FnMut(QEvent<T>),
{
    let state = env.reset(rng);
    let (mut register, mut action) = greedy_selection(program, q, state.as_ref(), external_factor, rng);
    observe(QEvent::Selected { register, action });
    let mut score = 0.0;
    loop {
        let outcome = env.step(action)?;
        score += outcome.reward.as_f64();
        if outcome.is_done() {
            break;
        }
        let (next_register, next_action) = greedy_selection(program, q, outcome.state.as_ref(), external_factor, rng);
        observe(QEvent::Selected {
            register: next_register,
            action: next_action,
        });
        if next_register != register {
            q.update(register, action, outcome.reward, next_register);
            observe(QEvent::Updated {
                state: register,
                action,
                reward: outcome.reward,
                next_state: next_register,
            });
        }
        register = next_register;
        action = next_action;
    }
    q.decay();
    observe(QEvent::EpisodeEnd { score });
    Ok(score)
}

/// Mean score over `h.n_trials` Q-learning episodes with an event observer.
/// The table keeps learning across the episodes.
pub fn eval_q_episodes_observed<T, E, R, F>(
    individual: &mut Individual<T>,
    h: &Hyperparameters,
    rng: &mut R,
    mut observe: F,
) -> f64
where
    T: Scalar,
    E: EpisodicEnvironment<T> + Default,
    R: Rng + ?Sized,
    F: FnMut(QEvent<T>),
{
    let program = &mut individual.program;
    if program.dims.n_inputs != E::N_INPUTS || program.dims.n_actions != E::N_ACTIONS || h.n_trials == 0 {
        return h.default_fitness;
    }
    let q = match (&mut individual.q_table, &h.q_params) {
        (Some(q), _) => q,
        (slot @ None, Some(params)) => slot.insert(QTable::new(program.dims.n_registers(), E::N_ACTIONS, params)),
        (None, None) => return h.default_fitness,
    };
    if q.n_registers() != program.dims.n_registers() || q.n_actions() != E::N_ACTIONS {
        return h.default_fitness;
    }
    let factor = T::of(h.external_factor);
    let mut env = E::default();
    let mut total = 0.0;
    for _ in 0..h.n_trials {
        match run_q_episode(program, q, &mut env, factor, rng, &mut observe) {
            Ok(score) => total += score,
            Err(_) => return h.default_fitness,
        }
    }
    let mean = total / h.n_trials as f64;
    if mean.is_finite() {
        mean
    } else {
        h.default_fitness
    }
}

pub fn eval_q_episodes<T, E, R>(individual: &mut Individual<T>, h: &Hyperparameters, rng: &mut R) -> f64
where
    T: Scalar,
    E: EpisodicEnvironment<T> + Default,
    R: Rng + ?Sized,
{
    eval_q_episodes_observed::<T, E, R, _>(individual, h, rng, |_| {})
}

/// Episodic fitness routed through each individual's Q-table.
#[derive(Debug, Clone)]
pub struct QLearningFitness<E> {
    hyperparameters: Hyperparameters,
    env: PhantomData<fn() -> E>,
}

impl<E> QLearningFitness<E> {
    pub fn new(h: &Hyperparameters) -> Self {
        Self {
            hyperparameters: h.clone(),
            env: PhantomData,
        }
    }
}

impl<T, E> FitnessEngine<T> for QLearningFitness<E>
where
    T: Scalar,
    E: EpisodicEnvironment<T> + Default,
{
    fn evaluate(&self, individual: &mut Individual<T>, rng: &mut RngStream) -> f64 {
        eval_q_episodes::<T, E, _>(individual, &self.hyperparameters, rng)
    }

    fn is_stochastic(&self) -> bool {
        true
    }
}
