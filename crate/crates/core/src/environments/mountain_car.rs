use rand::Rng;

use super::{EnvError, EpisodicEnvironment, StepOutcome};
use crate::scalar::Scalar;

const MIN_POSITION: f64 = -1.2;
const MAX_POSITION: f64 = 0.6;
const MAX_SPEED: f64 = 0.07;
const GOAL_POSITION: f64 = 0.5;
const FORCE: f64 = 0.001;
const GRAVITY: f64 = 0.0025;
const RESET_LOW: f64 = -0.6;
const RESET_HIGH: f64 = -0.4;
const MAX_STEPS: usize = 200;

/// Under-powered car in a valley.
///
/// State is `[position, velocity]`. Actions: 0 push left, 1 no push, 2 push
/// right. Every step pays -1.0; the episode terminates when the position
/// reaches 0.5 and is truncated after 200 steps.
#[derive(Debug, Clone)]
pub struct MountainCar<T> {
    state: [T; 2],
    steps: usize,
    done: bool,
}

impl<T: Scalar> Default for MountainCar<T> {
    fn default() -> Self {
        Self::with_state([T::of(-0.5), T::zero()])
    }
}

impl<T: Scalar> MountainCar<T> {
    pub fn with_state(state: [T; 2]) -> Self {
        Self {
            state,
            steps: 0,
            done: false,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

impl<T: Scalar> EpisodicEnvironment<T> for MountainCar<T> {
    type State = [T; 2];

    const N_INPUTS: usize = 2;
    const N_ACTIONS: usize = 3;
    const MAX_EPISODE_STEPS: usize = MAX_STEPS;

    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> [T; 2] {
        self.state = [T::of(rng.random_range(RESET_LOW..=RESET_HIGH)), T::zero()];
        self.steps = 0;
        self.done = false;
        self.state
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome<[T; 2], T>, EnvError> {
        if action >= Self::N_ACTIONS {
            return Err(EnvError::InvalidAction {
                action,
                n_actions: Self::N_ACTIONS,
            });
        }
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let [mut position, mut velocity] = self.state;
        let push = T::of(action as f64 - 1.0) * T::of(FORCE);
        velocity = velocity + push + (T::of(3.0) * position).cos() * T::of(-GRAVITY);
        velocity = velocity.max(T::of(-MAX_SPEED)).min(T::of(MAX_SPEED));
        position = position + velocity;
        position = position.max(T::of(MIN_POSITION)).min(T::of(MAX_POSITION));
        if position == T::of(MIN_POSITION) && velocity < T::zero() {
            velocity = T::zero();
        }
        self.state = [position, velocity];
        self.steps += 1;

        let terminal = position >= T::of(GOAL_POSITION);
        let truncated = self.steps >= MAX_STEPS;
        self.done = terminal || truncated;
        Ok(StepOutcome {
            state: self.state,
            reward: -T::one(),
            terminal,
            truncated,
        })
    }

    fn state(&self) -> [T; 2] {
        self.state
    }
}
