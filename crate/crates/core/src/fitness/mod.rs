//! Fitness engines: Iris accuracy, episodic score, and Q-learning-mediated
//! episodic score.

mod episodes;
mod iris;
mod q_learning;
mod q_table;

pub use episodes::{episode_scores, eval_episodes, run_episode, EpisodicFitness};
pub use iris::{eval_iris, IrisFitness};
pub use q_learning::{
    eval_q_episodes, eval_q_episodes_observed, greedy_selection, run_q_episode, QEvent, QLearningFitness,
};
pub use q_table::QTable;

use crate::engine::Individual;
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Scores one individual. Implementations must be shareable across threads;
/// all per-evaluation state lives in the individual and the stream.
pub trait FitnessEngine<T: Scalar>: Sync {
    fn evaluate(&self, individual: &mut Individual<T>, rng: &mut RngStream) -> f64;

    /// Stochastic engines re-score survivors every generation; deterministic
    /// ones keep cached fitness.
    fn is_stochastic(&self) -> bool;
}
