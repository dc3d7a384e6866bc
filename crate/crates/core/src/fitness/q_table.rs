use serde::{Deserialize, Serialize};

use crate::config::QParams;
use crate::scalar::{argmax, Scalar};

/// Action values indexed by (winning register, action), with the current
/// learning and exploration rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable<T> {
    values: Vec<T>,
    n_registers: usize,
    n_actions: usize,
    pub alpha: T,
    pub gamma: T,
    pub epsilon: T,
    pub alpha_decay: T,
    pub epsilon_decay: T,
}

impl<T: Scalar> QTable<T> {
    /// All-zero table of `n_registers` rows and `n_actions` columns.
    pub fn new(n_registers: usize, n_actions: usize, params: &QParams) -> Self {
        Self {
            values: vec![T::zero(); n_registers * n_actions],
            n_registers,
            n_actions,
            alpha: T::of(params.alpha),
            gamma: T::of(params.gamma),
            epsilon: T::of(params.epsilon),
            alpha_decay: T::of(params.alpha_decay),
            epsilon_decay: T::of(params.epsilon_decay),
        }
    }

    pub fn n_registers(&self) -> usize {
        self.n_registers
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn get(&self, register: usize, action: usize) -> T {
        self.values[register * self.n_actions + action]
    }

    pub fn set(&mut self, register: usize, action: usize, value: T) {
        self.values[register * self.n_actions + action] = value;
    }

    pub fn row(&self, register: usize) -> &[T] {
        let start = register * self.n_actions;
        &self.values[start..start + self.n_actions]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Highest-valued action for `register`, lowest index on ties.
    pub fn greedy_action(&self, register: usize) -> usize {
        argmax(self.row(register)).expect("q-table has at least one action")
    }

    /// One-step Q-learning update of `(state, action)`:
    /// `Q += alpha * (reward + gamma * max Q[next_state] - Q)`.
    /// Returns the applied change.
    pub fn update(&mut self, state: usize, action: usize, reward: T, next_state: usize) -> T {
        let next_best = self.row(next_state).iter().copied().fold(T::neg_infinity(), T::max);
        let current = self.get(state, action);
        let delta = self.alpha * (reward + self.gamma * next_best - current);
        self.set(state, action, current + delta);
        delta
    }

    /// Applies one step of learning-rate and exploration decay.
    pub fn decay(&mut self) {
        self.alpha = self.alpha * self.alpha_decay;
        self.epsilon = self.epsilon * self.epsilon_decay;
    }
}
