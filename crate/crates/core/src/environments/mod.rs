//! Episodic simulators and the Iris dataset.
//!
//! The simulators reproduce the classic-control reference dynamics used by
//! CartPole-v1 and MountainCar-v0. Physics constants for each live in one
//! table at the top of its module.

use std::fmt::Debug;

use rand::Rng;
use thiserror::Error;

use crate::scalar::Scalar;

mod cart_pole;
mod iris;
mod mountain_car;

pub use cart_pole::CartPole;
pub use iris::{load_iris, parse_iris, DatasetError, LabeledExample};
pub use mountain_car::MountainCar;

const BUNDLED_IRIS: &str = include_str!("../../assets/iris.csv");

/// The 150-row Iris dataset shipped with the crate.
pub fn bundled_iris<T: Scalar>() -> Vec<LabeledExample<T>> {
    parse_iris(BUNDLED_IRIS).expect("bundled Iris CSV is well formed")
}

/// Result of one environment transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome<S, T> {
    pub state: S,
    pub reward: T,
    /// The task reached a terminal condition.
    pub terminal: bool,
    /// The step limit was reached.
    pub truncated: bool,
}

impl<S, T> StepOutcome<S, T> {
    /// Either flag ends the episode.
    pub fn is_done(&self) -> bool {
        self.terminal || self.truncated
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("action {action} outside [0, {n_actions})")]
    InvalidAction { action: usize, n_actions: usize },
    #[error("step called after the episode ended")]
    EpisodeOver,
}

/// A resettable, single-owner episodic simulator.
pub trait EpisodicEnvironment<T: Scalar> {
    /// Observation type, a fixed-width feature vector.
    type State: AsRef<[T]> + Copy + Debug;

    const N_INPUTS: usize;
    const N_ACTIONS: usize;
    const MAX_EPISODE_STEPS: usize;

    /// Starts a new episode from a randomized initial state.
    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Self::State;

    /// Advances one step. Stepping after a terminal or truncated outcome is an
    /// error until the next `reset`.
    fn step(&mut self, action: usize) -> Result<StepOutcome<Self::State, T>, EnvError>;

    fn state(&self) -> Self::State;
}
