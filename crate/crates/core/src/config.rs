//! Run configuration: the hyperparameter record, its JSON loader, and range
//! validation.
//!
//! Files use the snake_case field names of [`Hyperparameters`]. Fields absent
//! from a file take the values of [`Hyperparameters::for_task`]. Q-learning
//! constants live in the nested `q_params` object, or can be supplied as a
//! second overlay file whose flat `alpha`/`gamma`/... keys are merged into
//! `q_params`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Learning constants for the Q-learning fitness engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub alpha_decay: f64,
    pub epsilon_decay: f64,
}

impl QParams {
    pub const FIELDS: [&'static str; 5] = ["alpha", "gamma", "epsilon", "alpha_decay", "epsilon_decay"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparameters {
    /// Fitness assigned when an evaluation fails or produces a non-finite score.
    pub default_fitness: f64,
    pub population_size: usize,
    /// Fraction of the ranked population replaced every generation.
    pub gap: f64,
    pub mutation_percent: f64,
    pub crossover_percent: f64,
    pub n_generations: usize,
    /// Episodes per fitness evaluation.
    pub n_trials: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    pub max_instructions: usize,
    /// Working registers beyond the action registers.
    pub n_extras: usize,
    /// Multiplier applied to every externally sourced operand.
    pub external_factor: f64,
    pub n_actions: usize,
    pub n_inputs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_params: Option<QParams>,
}

const FIELDS: [&str; 14] = [
    "default_fitness",
    "population_size",
    "gap",
    "mutation_percent",
    "crossover_percent",
    "n_generations",
    "n_trials",
    "seed",
    "max_instructions",
    "n_extras",
    "external_factor",
    "n_actions",
    "n_inputs",
    "q_params",
];

const INTEGER_FIELDS: [&str; 8] = [
    "population_size",
    "n_generations",
    "n_trials",
    "seed",
    "max_instructions",
    "n_extras",
    "n_actions",
    "n_inputs",
];

/// Supported problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Iris,
    CartPole,
    MountainCar,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Iris, Task::CartPole, Task::MountainCar];

    pub fn n_inputs(self) -> usize {
        match self {
            Task::Iris | Task::CartPole => 4,
            Task::MountainCar => 2,
        }
    }

    pub fn n_actions(self) -> usize {
        match self {
            Task::Iris | Task::MountainCar => 3,
            Task::CartPole => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Iris => "iris",
            Task::CartPole => "cart-pole",
            Task::MountainCar => "mountain-car",
        }
    }

    /// Whether fitness is a deterministic function of the program.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Task::Iris)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| ConfigError::UnknownTask(s.to_string()))
    }
}

/// One broken constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub value: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (got {})", self.message, self.value)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field == field)
    }

    fn push(&mut self, field: &'static str, value: impl fmt::Display, message: impl Into<String>) {
        self.violations.push(Violation {
            field,
            value: value.to_string(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed configuration {origin}: {source}")]
    Syntax {
        origin: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("configuration {origin} must be a JSON object")]
    NotAnObject { origin: String },
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("invalid configuration: {0}")]
    Invalid(ValidationReport),
    #[error("unknown task `{0}` (expected iris, cart-pole or mountain-car)")]
    UnknownTask(String),
}

impl Hyperparameters {
    /// Shipped defaults for `task`. These are this implementation's own
    /// choices, not values taken from any published parameter listing.
    pub fn for_task(task: Task) -> Self {
        // Failed evaluations must rank below every real score.
        let default_fitness = match task {
            Task::MountainCar => -200.0,
            Task::Iris | Task::CartPole => 0.0,
        };
        Self {
            default_fitness,
            population_size: 100,
            gap: 0.5,
            mutation_percent: 0.5,
            crossover_percent: 0.5,
            n_generations: 100,
            n_trials: 5,
            seed: None,
            max_instructions: 32,
            n_extras: 1,
            external_factor: 10.0,
            n_actions: task.n_actions(),
            n_inputs: task.n_inputs(),
            q_params: None,
        }
    }

    pub fn n_registers(&self) -> usize {
        self.n_actions + self.n_extras
    }

    /// Checks every field against its allowed range. One entry per violation.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if !self.default_fitness.is_finite() {
            report.push(
                "default_fitness",
                self.default_fitness,
                "default_fitness must be finite",
            );
        }
        if !(self.gap > 0.0 && self.gap < 1.0) {
            report.push("gap", self.gap, "gap must lie in (0, 1)");
        }
        unit_interval(&mut report, "mutation_percent", self.mutation_percent);
        unit_interval(&mut report, "crossover_percent", self.crossover_percent);
        if self.mutation_percent + self.crossover_percent > 1.0 + 1e-12 {
            report.push(
                "mutation_percent",
                self.mutation_percent + self.crossover_percent,
                "mutation_percent + crossover_percent must not exceed 1",
            );
        }
        if self.n_trials < 1 {
            report.push("n_trials", self.n_trials, "n_trials must be ≥ 1");
        }
        if self.max_instructions < 1 {
            report.push(
                "max_instructions",
                self.max_instructions,
                "max_instructions must be ≥ 1",
            );
        }
        if self.n_extras < 1 {
            report.push("n_extras", self.n_extras, "n_extras must be ≥ 1");
        }
        if !(self.external_factor >= 0.0 && self.external_factor.is_finite()) {
            report.push("external_factor", self.external_factor, "external_factor must be ≥ 0");
        }
        if self.n_actions < 1 {
            report.push("n_actions", self.n_actions, "n_actions must be ≥ 1");
        }
        if self.n_inputs < 1 {
            report.push("n_inputs", self.n_inputs, "n_inputs must be ≥ 1");
        }
        if let Some(q) = &self.q_params {
            unit_interval(&mut report, "alpha", q.alpha);
            unit_interval(&mut report, "gamma", q.gamma);
            unit_interval(&mut report, "epsilon", q.epsilon);
            unit_interval(&mut report, "alpha_decay", q.alpha_decay);
            unit_interval(&mut report, "epsilon_decay", q.epsilon_decay);
        }
        report
    }

    /// [`validate`](Self::validate) plus a check that the register and input
    /// widths match `task`.
    pub fn validate_for(&self, task: Task) -> ValidationReport {
        let mut report = self.validate();
        if self.n_inputs != task.n_inputs() {
            report.push(
                "n_inputs",
                self.n_inputs,
                format!("{task} has {} inputs", task.n_inputs()),
            );
        }
        if self.n_actions != task.n_actions() {
            report.push(
                "n_actions",
                self.n_actions,
                format!("{task} has {} actions", task.n_actions()),
            );
        }
        report
    }

    /// Fixes the seed, drawing one from system entropy when absent.
    pub fn with_resolved_seed(mut self) -> Self {
        if self.seed.is_none() {
            let seed = crate::rng::entropy_seed();
            log::info!("no seed configured, drew {seed} from system entropy");
            self.seed = Some(seed);
        }
        self
    }

    /// Applies a JSON object of field overrides. Flat Q-learning keys are
    /// routed into `q_params`.
    pub fn with_overrides(&self, overrides: &Map<String, Value>) -> Result<Self, ConfigError> {
        let base = match serde_json::to_value(self).expect("hyperparameters serialize") {
            Value::Object(map) => map,
            _ => unreachable!(),
        };
        let merged = merge(base, overrides.clone())?;
        from_object(merged)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("hyperparameters serialize")
    }
}

fn unit_interval(report: &mut ValidationReport, field: &'static str, value: f64) {
    if !(0.0..=1.0).contains(&value) {
        report.push(field, value, format!("{field} must lie in [0, 1]"));
    }
}

fn read_object(path: &Path) -> Result<Map<String, Value>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_object(&text, &path.display().to_string())
}

fn parse_object(text: &str, origin: &str) -> Result<Map<String, Value>, ConfigError> {
    match serde_json::from_str(text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(ConfigError::NotAnObject {
            origin: origin.to_string(),
        }),
        Err(source) => Err(ConfigError::Syntax {
            origin: origin.to_string(),
            source,
        }),
    }
}

/// Overlays `overlay` onto `base`. Keys naming a Q-learning constant go into
/// the nested `q_params` object; a nested `q_params` object is merged key by
/// key.
fn merge(mut base: Map<String, Value>, overlay: Map<String, Value>) -> Result<Map<String, Value>, ConfigError> {
    for (key, value) in overlay {
        if QParams::FIELDS.contains(&key.as_str()) {
            q_object(&mut base).insert(key, value);
        } else if key == "q_params" {
            match value {
                Value::Object(inner) => {
                    let q = q_object(&mut base);
                    for (k, v) in inner {
                        q.insert(k, v);
                    }
                }
                Value::Null => {
                    base.remove("q_params");
                }
                other => {
                    base.insert(key, other);
                }
            }
        } else if FIELDS.contains(&key.as_str()) {
            base.insert(key, value);
        } else {
            return Err(ConfigError::UnknownField(key));
        }
    }
    Ok(base)
}

fn q_object(map: &mut Map<String, Value>) -> &mut Map<String, Value> {
    let entry = map.entry("q_params").or_insert_with(|| Value::Object(Map::new()));
    if !entry.is_object() {
        *entry = Value::Object(Map::new());
    }
    entry.as_object_mut().expect("just made an object")
}

fn from_object(map: Map<String, Value>) -> Result<Hyperparameters, ConfigError> {
    let mut report = ValidationReport::default();
    for field in INTEGER_FIELDS {
        if let Some(v) = map.get(field) {
            if v.is_null() && field == "seed" {
                continue;
            }
            if v.is_number() && v.as_u64().is_none() {
                report.push(field, v, format!("{field} must be a non-negative integer"));
            }
        }
    }
    if let Some(Value::Object(q)) = map.get("q_params") {
        for key in q.keys() {
            if !QParams::FIELDS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownField(format!("q_params.{key}")));
            }
        }
    }
    if !report.is_clean() {
        return Err(ConfigError::Invalid(report));
    }
    serde_json::from_value(Value::Object(map)).map_err(|source| ConfigError::Syntax {
        origin: "record".to_string(),
        source,
    })
}

fn finish(map: Map<String, Value>, task: Task) -> Result<Hyperparameters, ConfigError> {
    let h = from_object(map)?;
    let report = h.validate_for(task);
    if report.is_clean() {
        Ok(h)
    } else {
        Err(ConfigError::Invalid(report))
    }
}

fn task_defaults(task: Task) -> Map<String, Value> {
    match serde_json::to_value(Hyperparameters::for_task(task)).expect("defaults serialize") {
        Value::Object(map) => map,
        _ => unreachable!(),
    }
}

/// Parses a configuration from JSON text, filling absent fields with the
/// defaults for `task`.
pub fn parse_config(text: &str, task: Task) -> Result<Hyperparameters, ConfigError> {
    let overlay = parse_object(text, "<string>")?;
    finish(merge(task_defaults(task), overlay)?, task)
}

/// Loads and validates a configuration file for `task`.
pub fn load_config(path: impl AsRef<Path>, task: Task) -> Result<Hyperparameters, ConfigError> {
    let overlay = read_object(path.as_ref())?;
    finish(merge(task_defaults(task), overlay)?, task)
}

/// Loads a base configuration and merges a Q-learning overlay file over it.
pub fn load_config_with_overlay(
    base: impl AsRef<Path>,
    overlay: impl AsRef<Path>,
    task: Task,
) -> Result<Hyperparameters, ConfigError> {
    let base_map = merge(task_defaults(task), read_object(base.as_ref())?)?;
    let merged = merge(base_map, read_object(overlay.as_ref())?)?;
    finish(merged, task)
}
