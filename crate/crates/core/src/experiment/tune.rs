use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{evolve_task, ExperimentError};
use crate::config::{parse_config, Hyperparameters, Task};
use crate::engine::EvolveOptions;
use crate::rng::stream_from_seed;

/// A fixed value or an inclusive `[low, high]` interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamRange {
    Point(f64),
    Interval([f64; 2]),
}

impl ParamRange {
    fn bounds(self) -> (f64, f64) {
        match self {
            ParamRange::Point(v) => (v, v),
            ParamRange::Interval([lo, hi]) => (lo, hi),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Int,
    Real,
}

#[derive(Debug, Clone, Copy)]
struct Domain {
    kind: Kind,
    min: f64,
    min_open: bool,
    max: f64,
    max_open: bool,
    q_param: bool,
}

const fn domain(kind: Kind, min: f64, min_open: bool, max: f64, max_open: bool) -> Domain {
    Domain {
        kind,
        min,
        min_open,
        max,
        max_open,
        q_param: false,
    }
}

const fn q_domain() -> Domain {
    Domain {
        q_param: true,
        ..domain(Kind::Real, 0.0, false, 1.0, false)
    }
}

/// Parameters the search may vary, with the values they may take.
fn tunable(name: &str) -> Option<Domain> {
    const INF: f64 = f64::INFINITY;
    Some(match name {
        "population_size" => domain(Kind::Int, 1.0, false, INF, false),
        "gap" => domain(Kind::Real, 0.0, true, 1.0, true),
        "mutation_percent" | "crossover_percent" => domain(Kind::Real, 0.0, false, 1.0, false),
        "n_generations" => domain(Kind::Int, 1.0, false, INF, false),
        "n_trials" | "max_instructions" | "n_extras" => domain(Kind::Int, 1.0, false, INF, false),
        "external_factor" => domain(Kind::Real, 0.0, false, INF, true),
        "alpha" | "gamma" | "epsilon" | "alpha_decay" | "epsilon_decay" => q_domain(),
        _ => return None,
    })
}

impl Domain {
    fn admits(&self, v: f64) -> bool {
        let above = if self.min_open { v > self.min } else { v >= self.min };
        let below = if self.max_open { v < self.max } else { v <= self.max };
        let integral = matches!(self.kind, Kind::Real) || v.fract() == 0.0;
        v.is_finite() && above && below && integral
    }
}

/// A base configuration plus the ranges random search draws from.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub base: Hyperparameters,
    pub ranges: BTreeMap<String, ParamRange>,
    /// Generation count of each scoring run; the sampled value when absent.
    pub eval_generations: Option<usize>,
    /// Scoring runs per sampled configuration.
    pub eval_seeds: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    #[serde(default)]
    base: Map<String, Value>,
    ranges: BTreeMap<String, ParamRange>,
    eval_generations: Option<usize>,
    eval_seeds: Option<usize>,
}

impl SearchSpace {
    /// Parses a space file: `{"base": {..}, "ranges": {"gap": [0.2, 0.8], ..},
    /// "eval_generations": 20, "eval_seeds": 3}`. Fields missing from `base`
    /// take the task defaults.
    pub fn from_json(text: &str, task: Task) -> Result<Self, ExperimentError> {
        let file: SpaceFile = serde_json::from_str(text).map_err(|e| ExperimentError::InvalidSpace(e.to_string()))?;
        let base = parse_config(&Value::Object(file.base).to_string(), task)?;
        let space = Self {
            base,
            ranges: file.ranges,
            eval_generations: file.eval_generations,
            eval_seeds: file.eval_seeds.unwrap_or(3),
        };
        space.check()?;
        Ok(space)
    }

    fn check(&self) -> Result<(), ExperimentError> {
        let invalid = |msg: String| Err(ExperimentError::InvalidSpace(msg));
        if self.eval_seeds == 0 {
            return invalid("eval_seeds must be at least 1".into());
        }
        if self.eval_generations == Some(0) {
            return invalid("eval_generations must be at least 1".into());
        }
        if self.base.n_generations == 0 && self.eval_generations.is_none() && !self.ranges.contains_key("n_generations")
        {
            return invalid("scoring runs need at least one generation".into());
        }
        for (name, range) in &self.ranges {
            let Some(domain) = tunable(name) else {
                return invalid(format!("`{name}` cannot be tuned"));
            };
            if domain.q_param && self.base.q_params.is_none() {
                return invalid(format!("`{name}` needs a base configuration with q_params"));
            }
            let (lo, hi) = range.bounds();
            if lo > hi {
                return invalid(format!("`{name}` range [{lo}, {hi}] is empty"));
            }
            if !domain.admits(lo) || !domain.admits(hi) {
                return invalid(format!(
                    "`{name}` range [{lo}, {hi}] leaves the parameter's allowed values"
                ));
            }
        }
        Ok(())
    }

    /// Draws one configuration. Draws violating the combined operator-share
    /// limit are rejected and redrawn.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Hyperparameters, ExperimentError> {
        const ATTEMPTS: usize = 10_000;
        for _ in 0..ATTEMPTS {
            let mut overrides = Map::new();
            for (name, range) in &self.ranges {
                let domain = tunable(name).expect("checked at construction");
                let (lo, hi) = range.bounds();
                let value = match domain.kind {
                    Kind::Int => Value::from(rng.random_range(lo as u64..=hi as u64)),
                    Kind::Real if lo == hi => Value::from(lo),
                    Kind::Real => Value::from(rng.random_range(lo..=hi)),
                };
                overrides.insert(name.clone(), value);
            }
            let h = self.base.with_overrides(&overrides)?;
            if h.validate().is_clean() {
                return Ok(h);
            }
        }
        Err(ExperimentError::InvalidSpace(
            "no valid configuration found; mutation_percent + crossover_percent always exceeds 1".into(),
        ))
    }
}

pub fn load_space(path: impl AsRef<Path>, task: Task) -> Result<SearchSpace, ExperimentError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ExperimentError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    SearchSpace::from_json(&text, task)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub index: usize,
    pub objective: f64,
    pub config: Hyperparameters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub best: Hyperparameters,
    pub best_objective: f64,
    pub trials: Vec<Trial>,
}

impl TuneOutcome {
    /// Trial log: index, objective, then every tuned parameter in name order.
    pub fn trial_log_csv(&self, space: &SearchSpace) -> String {
        let names: Vec<&String> = space.ranges.keys().collect();
        let mut out = String::from("trial,objective");
        for name in &names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for trial in &self.trials {
            write!(out, "{},{:.6}", trial.index, trial.objective).unwrap();
            let values = match serde_json::to_value(&trial.config).expect("serialize") {
                Value::Object(map) => map,
                _ => unreachable!(),
            };
            for name in &names {
                let v = values
                    .get(name.as_str())
                    .or_else(|| values.get("q_params").and_then(|q| q.get(name.as_str())))
                    .cloned()
                    .unwrap_or(Value::Null);
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Samples `budget` configurations and scores each by the final-generation
/// best fitness averaged over `space.eval_seeds` short runs. All candidates
/// share the same scoring seeds. Returns the first highest-scoring
/// configuration and the full trial list.
pub fn random_search(
    space: &SearchSpace,
    task: Task,
    budget: usize,
    seed: u64,
) -> Result<TuneOutcome, ExperimentError> {
    if budget == 0 {
        return Err(ExperimentError::InvalidSpace("budget must be at least 1".into()));
    }
    let mut rng = stream_from_seed(seed);
    let candidates = (0..budget)
        .map(|_| space.sample(&mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let scoring_seeds: Vec<u64> = (0..space.eval_seeds as u64).map(|j| seed.wrapping_add(1 + j)).collect();

    let trials = candidates
        .into_par_iter()
        .enumerate()
        .map(|(index, config)| {
            let mut scoring = config.clone();
            if let Some(g) = space.eval_generations {
                scoring.n_generations = g;
            }
            let mut total = 0.0;
            for &s in &scoring_seeds {
                let (_, series) = evolve_task(&scoring, task, s, EvolveOptions::default(), |_, _| {})?;
                total += series.last().map_or(scoring.default_fitness, |r| r.max);
            }
            Ok(Trial {
                index,
                objective: total / scoring_seeds.len() as f64,
                config,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;

    let mut best = &trials[0];
    for trial in &trials[1..] {
        if trial.objective > best.objective {
            best = trial;
        }
    }
    Ok(TuneOutcome {
        best: best.config.clone(),
        best_objective: best.objective,
        trials,
    })
}
