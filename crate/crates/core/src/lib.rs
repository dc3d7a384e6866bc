//! Linear genetic programming over register machines, with an optional
//! tabular Q-learning layer that learns which action each winning register
//! should trigger.
//!
//! The core is generic over the register scalar ([`Scalar`], implemented for
//! `f32` and `f64`). The aliases below fix it to `f64`, which is what the CLI
//! and the experiment pipeline use.

pub mod config;
pub mod engine;
pub mod environments;
pub mod experiment;
pub mod fitness;
pub mod program;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod variation;

pub use config::{Hyperparameters, QParams, Task};
pub use rng::RngStream;
pub use scalar::Scalar;
pub use stats::GenerationStats;

pub type Program = program::Program<f64>;
pub type RegisterSet = program::RegisterSet<f64>;
pub type Individual = engine::Individual<f64>;
pub type Population = engine::Population<f64>;
pub type QTable = fitness::QTable<f64>;
pub type CartPole = environments::CartPole<f64>;
pub type MountainCar = environments::MountainCar<f64>;
pub type LabeledExample = environments::LabeledExample<f64>;

pub type Program32 = program::Program<f32>;
pub type Individual32 = engine::Individual<f32>;
pub type QTable32 = fitness::QTable<f32>;
