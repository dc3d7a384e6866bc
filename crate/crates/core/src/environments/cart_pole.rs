use rand::Rng;

use super::{EnvError, EpisodicEnvironment, StepOutcome};
use crate::scalar::Scalar;

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
/// Half the pole length.
const HALF_LENGTH: f64 = 0.5;
const FORCE_MAG: f64 = 10.0;
/// Integration timestep in seconds.
const TAU: f64 = 0.02;
const X_THRESHOLD: f64 = 2.4;
const THETA_THRESHOLD_DEGREES: f64 = 12.0;
const RESET_BOUND: f64 = 0.05;
const MAX_STEPS: usize = 500;

/// Pole balanced on a cart, explicit Euler integration.
///
/// State is `[x, x_dot, theta, theta_dot]`. Action 0 pushes left, 1 pushes
/// right. Every step pays 1.0; the episode terminates once `|x| > 2.4` or
/// `|theta| > 12°` and is truncated after 500 steps.
#[derive(Debug, Clone)]
pub struct CartPole<T> {
    state: [T; 4],
    steps: usize,
    done: bool,
}

impl<T: Scalar> Default for CartPole<T> {
    fn default() -> Self {
        Self::with_state([T::zero(); 4])
    }
}

impl<T: Scalar> CartPole<T> {
    /// Starts an episode from an explicit state.
    pub fn with_state(state: [T; 4]) -> Self {
        Self {
            state,
            steps: 0,
            done: false,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn theta_threshold() -> T {
        T::of(THETA_THRESHOLD_DEGREES * 2.0 * std::f64::consts::PI / 360.0)
    }

    fn is_terminal(&self) -> bool {
        let [x, _, theta, _] = self.state;
        x.abs() > T::of(X_THRESHOLD) || theta.abs() > Self::theta_threshold()
    }
}

impl<T: Scalar> EpisodicEnvironment<T> for CartPole<T> {
    type State = [T; 4];

    const N_INPUTS: usize = 4;
    const N_ACTIONS: usize = 2;
    const MAX_EPISODE_STEPS: usize = MAX_STEPS;

    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> [T; 4] {
        for v in &mut self.state {
            *v = T::of(rng.random_range(-RESET_BOUND..=RESET_BOUND));
        }
        self.steps = 0;
        self.done = false;
        self.state
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome<[T; 4], T>, EnvError> {
        if action >= Self::N_ACTIONS {
            return Err(EnvError::InvalidAction {
                action,
                n_actions: Self::N_ACTIONS,
            });
        }
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let [x, x_dot, theta, theta_dot] = self.state;
        let force = T::of(if action == 1 { FORCE_MAG } else { -FORCE_MAG });
        let total_mass = T::of(MASS_CART + MASS_POLE);
        let pole_mass_length = T::of(MASS_POLE * HALF_LENGTH);
        let (sin, cos) = theta.sin_cos();

        let temp = (force + pole_mass_length * theta_dot * theta_dot * sin) / total_mass;
        let theta_acc = (T::of(GRAVITY) * sin - cos * temp)
            / (T::of(HALF_LENGTH) * (T::of(4.0 / 3.0) - T::of(MASS_POLE) * cos * cos / total_mass));
        let x_acc = temp - pole_mass_length * theta_acc * cos / total_mass;

        let tau = T::of(TAU);
        self.state = [
            x + tau * x_dot,
            x_dot + tau * x_acc,
            theta + tau * theta_dot,
            theta_dot + tau * theta_acc,
        ];
        self.steps += 1;

        let terminal = self.is_terminal();
        let truncated = self.steps >= MAX_STEPS;
        self.done = terminal || truncated;
        Ok(StepOutcome {
            state: self.state,
            reward: T::one(),
            terminal,
            truncated,
        })
    }

    fn state(&self) -> [T; 4] {
        self.state
    }
}
