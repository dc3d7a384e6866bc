//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

mod common;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, RngAlgorithm, TestRng, TestRunner};
use sha2::{Digest, Sha256};

use rlgp::config::{load_config, Hyperparameters, QParams, Task};
use rlgp::engine::{evolve_with, removal_count, EvolveOptions, Individual};
use rlgp::environments::{bundled_iris, CartPole, MountainCar};
use rlgp::experiment::evolve_task;
use rlgp::fitness::{episode_scores, eval_q_episodes_observed, FitnessEngine, IrisFitness, QEvent};
use rlgp::program::{Dimensions, Instruction, Mode, Operation, Program};
use rlgp::rng::{stream_from_seed, RngStream};
use rlgp::variation::{crossover, generate_program, mutate};
use rlgp::QTable;

const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn parameters(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("assets/parameters")
        .join(name)
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        ProptestConfig {
            cases,
            failure_persistence: None,
            ..ProptestConfig::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Independent table update: a plain nested vector, written out longhand.
fn oracle_update(table: &mut [Vec<f64>], alpha: f64, gamma: f64, s: usize, a: usize, r: f64, next: usize) {
    let mut best_next = table[next][0];
    for &v in &table[next][1..] {
        if v > best_next {
            best_next = v;
        }
    }
    let old = table[s][a];
    let target = r + gamma * best_next;
    table[s][a] = old + alpha * (target - old);
}

fn q_update_oracle() -> Verdict {
    let strategy = (1usize..8, 1usize..5).prop_flat_map(|(rows, cols)| {
        (
            prop::collection::vec(-10.0f64..10.0, rows * cols),
            0.0f64..=1.0,
            0.0f64..=1.0,
            0..rows,
            0..cols,
            -5.0f64..5.0,
            0..rows,
            Just((rows, cols)),
        )
    });
    let worst = std::cell::Cell::new(0.0f64);
    let result = runner(1000).run(&strategy, |(values, alpha, gamma, s, a, r, next, (rows, cols))| {
        let params = QParams {
            alpha,
            gamma,
            epsilon: 0.0,
            alpha_decay: 1.0,
            epsilon_decay: 1.0,
        };
        let mut q = QTable::new(rows, cols, &params);
        let mut table: Vec<Vec<f64>> = values.chunks(cols).map(<[f64]>::to_vec).collect();
        for (i, row) in table.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                q.set(i, j, *v);
            }
        }
        q.update(s, a, r, next);
        oracle_update(&mut table, alpha, gamma, s, a, r, next);
        for (i, row) in table.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let diff = (q.get(i, j) - v).abs();
                worst.set(worst.get().max(diff));
                prop_assert!(diff <= 1e-12, "cell ({i}, {j}) differs by {diff}");
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => verdict(
            true,
            format!("1000 random updates, max |diff| {:.1e} <= 1e-12", worst.get()),
        ),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn physics_golden() -> Verdict {
    let mismatches = common::golden_mismatches();
    if let Some((name, step, i, actual, expected)) = mismatches.first() {
        return verdict(
            false,
            format!("{name} step {step} component {i}: {actual} vs {expected}"),
        );
    }
    use rand::Rng;
    use rlgp::environments::EpisodicEnvironment;
    let mut rng = stream_from_seed(99);
    let mut env = MountainCar::<f64>::default();
    env.reset(&mut rng);
    for step in 0..10_000 {
        let out = env.step(rng.random_range(0..3)).expect("episode running");
        let [p, v] = out.state;
        if !(-1.2..=0.6).contains(&p) || !(-0.07..=0.07).contains(&v) || (p == -1.2 && v < 0.0) {
            return verdict(false, format!("clamp violated at random step {step}: ({p}, {v})"));
        }
        if out.is_done() {
            env.reset(&mut rng);
        }
    }
    verdict(
        true,
        "3 ten-step rollouts within 1e-9 relative; 10000 random MountainCar steps respect clamps",
    )
}

fn operator_closure() -> Verdict {
    let strategy = (any::<u64>(), 1usize..5, 1usize..5, 1usize..6, 1usize..40);
    let result = runner(10_000).run(&strategy, |(seed, n_actions, n_extras, n_inputs, max)| {
        let mut h = Hyperparameters::for_task(Task::Iris);
        (h.n_actions, h.n_extras, h.n_inputs, h.max_instructions) = (n_actions, n_extras, n_inputs, max);
        let mut rng = stream_from_seed(seed);
        let p1: Program<f64> = generate_program(&h, &mut rng);
        let p2: Program<f64> = generate_program(&h, &mut rng);
        let (c1, c2) = (p1.clone(), p2.clone());
        let child = crossover(&p1, &p2, &mut rng);
        let mutant = mutate(&p1, &mut rng);
        prop_assert!(child.check(max).is_ok());
        prop_assert!(mutant.check(max).is_ok());
        prop_assert!(child.len() == p1.len() || child.len() == p2.len());
        prop_assert_eq!(mutant.len(), p1.len());
        prop_assert_eq!(format!("{p1:?}"), format!("{c1:?}"));
        prop_assert_eq!(format!("{p2:?}"), format!("{c2:?}"));
        Ok(())
    });
    match result {
        Ok(()) => verdict(true, "10000 crossover + mutate applications valid, parents unchanged"),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn run_cli(config: &Path, out: &Path, threads: Option<&str>) -> Result<String, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rlgp"));
    if let Some(t) = threads {
        cmd.args(["--threads", t]);
    }
    cmd.args(["run", "--task", "cart-pole", "--experiments", "3", "--seed", "11"])
        .arg("--config")
        .arg(config)
        .arg("--out-dir")
        .arg(out);
    let output = cmd.output().map_err(|e| e.to_string())?;
    if !output.status.success() {
        return Err(String::from_utf8_lossy(&output.stderr).into_owned());
    }
    let bytes = fs::read(out.join("aggregate.csv")).map_err(|e| e.to_string())?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"population_size": 40, "n_generations": 8, "n_trials": 3}"#).expect("write config");
    let runs = [
        run_cli(&config, &dir.path().join("a"), None),
        run_cli(&config, &dir.path().join("b"), None),
        run_cli(&config, &dir.path().join("c"), Some("1")),
        run_cli(&config, &dir.path().join("d"), Some("4")),
    ];
    let hashes: Result<Vec<_>, _> = runs.into_iter().collect();
    match hashes {
        Err(e) => verdict(false, format!("run failed: {e}")),
        Ok(h) => verdict(
            h.iter().all(|x| *x == h[0]),
            format!("4 runs (default, default, 1 thread, 4 threads) sha256 {}", &h[0][..16]),
        ),
    }
}

/// Counts evaluations passed through to the Iris engine.
struct Counting {
    inner: IrisFitness<f64>,
    calls: AtomicUsize,
}

impl FitnessEngine<f64> for Counting {
    fn evaluate(&self, individual: &mut Individual<f64>, rng: &mut RngStream) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(individual, rng)
    }

    fn is_stochastic(&self) -> bool {
        self.inner.is_stochastic()
    }
}

fn elitism() -> Verdict {
    let mixes = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.5, 0.5), (0.2, 0.3), (0.7, 0.3)];
    for (seed, (mutation, crossover)) in mixes.into_iter().enumerate() {
        let mut h = Hyperparameters::for_task(Task::Iris);
        (
            h.gap,
            h.mutation_percent,
            h.crossover_percent,
            h.n_generations,
            h.external_factor,
        ) = (0.5, mutation, crossover, 50, 1.0);
        let engine = Counting {
            inner: IrisFitness::new(bundled_iris(), &h),
            calls: AtomicUsize::new(0),
        };
        let (_, series) = match evolve_with::<f64, _, _>(&h, &engine, seed as u64, EvolveOptions::default(), |_, _| {})
        {
            Ok(r) => r,
            Err(e) => return verdict(false, e.to_string()),
        };
        if let Some(w) = series.windows(2).find(|w| w[1].max < w[0].max) {
            return verdict(
                false,
                format!(
                    "mix ({mutation}, {crossover}): best fell from {} to {} at generation {}",
                    w[0].max, w[1].max, w[1].generation
                ),
            );
        }
        let expected = h.population_size + (h.n_generations - 1) * removal_count(h.population_size, h.gap);
        let calls = engine.calls.load(Ordering::Relaxed);
        if calls != expected {
            return verdict(false, format!("{calls} evaluations, {expected} expected with caching"));
        }
    }
    verdict(
        true,
        "6 operator mixes x 50 generations: best never decreases; survivors not re-evaluated",
    )
}

/// Q-learning on CartPole that tallies updates and winning-register changes.
struct Instrumented {
    h: Hyperparameters,
    updates: AtomicUsize,
    changes: AtomicUsize,
}

fn tally(events: &[QEvent<f64>]) -> (usize, usize, Vec<usize>) {
    let (mut updates, mut changes, mut registers) = (0, 0, Vec::new());
    let mut previous = None;
    for e in events {
        match *e {
            QEvent::Selected { register, .. } => {
                if previous.is_some_and(|p| p != register) {
                    changes += 1;
                }
                previous = Some(register);
                registers.push(register);
            }
            QEvent::Updated { .. } => updates += 1,
            QEvent::EpisodeEnd { .. } => previous = None,
        }
    }
    (updates, changes, registers)
}

impl FitnessEngine<f64> for Instrumented {
    fn evaluate(&self, individual: &mut Individual<f64>, rng: &mut RngStream) -> f64 {
        let mut events = Vec::new();
        let f = eval_q_episodes_observed::<f64, CartPole<f64>, _, _>(individual, &self.h, rng, |e| events.push(e));
        let (updates, changes, _) = tally(&events);
        self.updates.fetch_add(updates, Ordering::Relaxed);
        self.changes.fetch_add(changes, Ordering::Relaxed);
        f
    }

    fn is_stochastic(&self) -> bool {
        true
    }
}

fn q_structure() -> Verdict {
    let mut h = Hyperparameters::for_task(Task::CartPole);
    (h.population_size, h.n_generations, h.n_extras) = (30, 6, 3);
    h.q_params = Some(QParams {
        alpha: 0.1,
        gamma: 0.9,
        epsilon: 0.2,
        alpha_decay: 0.99,
        epsilon_decay: 0.99,
    });
    let engine = Instrumented {
        h: h.clone(),
        updates: AtomicUsize::new(0),
        changes: AtomicUsize::new(0),
    };
    if let Err(e) = evolve_with::<f64, _, _>(&h, &engine, 5, EvolveOptions::default(), |_, _| {}) {
        return verdict(false, e.to_string());
    }
    let (updates, changes) = (engine.updates.into_inner(), engine.changes.into_inner());
    if updates != changes || updates == 0 {
        return verdict(false, format!("{updates} updates vs {changes} register changes"));
    }

    // R[1] = (factor * x)^2 dominates the zero registers for any nonzero cart
    // position, so the winning register is constant.
    let mut still = h.clone();
    still.q_params.as_mut().expect("set above").epsilon = 0.0;
    let program = Program::new(
        vec![
            Instruction::new(1, 0, Operation::Add, Mode::External),
            Instruction::new(1, 1, Operation::Mul, Mode::Internal),
        ],
        Dimensions::of(&still),
    )
    .expect("valid program");
    let mut individual = Individual::new(program, &still);
    let mut events = Vec::new();
    eval_q_episodes_observed::<f64, CartPole<f64>, _, _>(&mut individual, &still, &mut stream_from_seed(8), |e| {
        events.push(e)
    });
    let (quiet, _, registers) = tally(&events);
    if registers.iter().any(|r| *r != 1) {
        return verdict(false, "winning register was not constant in the epsilon = 0 check");
    }
    verdict(
        quiet == 0,
        format!("{updates} updates = {changes} register changes over an evolve run; {quiet} updates over {} constant-register selections", registers.len()),
    )
}

fn final_best(h: &Hyperparameters, task: Task, seed: u64) -> Result<(f64, f64), String> {
    let (_, series) = evolve_task(h, task, seed, EvolveOptions::default(), |_, _| {}).map_err(|e| e.to_string())?;
    let last = series.last().ok_or("empty series")?;
    Ok((last.max, last.mean))
}

fn iris_matrix() -> Verdict {
    let start = Instant::now();
    let base = match load_config(parameters("iris.json"), Task::Iris) {
        Ok(h) => h,
        Err(e) => return verdict(false, e.to_string()),
    };
    if base.population_size != 100 || base.n_generations != 100 {
        return verdict(false, "iris parameters must use population 100 and 100 generations");
    }
    let mixes = [
        ("both", 0.5, 0.5),
        ("reproduction", 0.0, 0.0),
        ("mutation", 1.0, 0.0),
        ("crossover", 0.0, 1.0),
    ];
    let mut medians = Vec::new();
    for (name, mutation, crossover) in mixes {
        let mut h = base.clone();
        (h.mutation_percent, h.crossover_percent) = (mutation, crossover);
        let mut best = Vec::new();
        for seed in SEEDS {
            match final_best(&h, Task::Iris, seed) {
                Ok((max, _)) => best.push(max),
                Err(e) => return verdict(false, e),
            }
        }
        medians.push((name, median(&best)));
    }
    let elapsed = start.elapsed();
    let both = medians[0].1;
    let pass = medians[1..].iter().all(|(_, m)| both >= *m) && elapsed <= Duration::from_secs(120);
    let listing: Vec<String> = medians.iter().map(|(n, m)| format!("{n} {m:.4}")).collect();
    verdict(
        pass,
        format!(
            "median best accuracy: {} ({:.1}s)",
            listing.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn cart_pole_solved() -> Verdict {
    let start = Instant::now();
    let h = match load_config(parameters("cart-pole-lgp.json"), Task::CartPole) {
        Ok(h) => h,
        Err(e) => return verdict(false, e.to_string()),
    };
    if h.n_generations > 20 {
        return verdict(false, "tuned parameters run past 20 generations");
    }
    let mut check = h.clone();
    check.n_trials = 100;
    let mut solved = Vec::new();
    for seed in SEEDS {
        let mut first = None;
        let outcome = evolve_task(
            &h,
            Task::CartPole,
            seed,
            EvolveOptions::default(),
            |generation, population| {
                if first.is_some() {
                    return;
                }
                let mut program = population.best().expect("non-empty").program.clone();
                let mut rng = stream_from_seed(0xC0FFEE ^ (seed << 8) ^ generation as u64);
                let scores =
                    episode_scores::<f64, CartPole<f64>, _>(&mut program, &check, &mut rng).expect("episodes run");
                if scores.iter().sum::<f64>() / scores.len() as f64 >= 195.0 {
                    first = Some(generation);
                }
            },
        );
        if let Err(e) = outcome {
            return verdict(false, e.to_string());
        }
        solved.push(first);
    }
    let elapsed = start.elapsed();
    let count = solved.iter().filter(|s| s.is_some()).count();
    let generations: Vec<String> = solved.iter().map(|s| s.map_or("-".into(), |g| g.to_string())).collect();
    verdict(
        count >= 8 && elapsed <= Duration::from_secs(600),
        format!(
            "{count}/10 runs reach a 100-episode mean >= 195 (first generation per seed: {}; {:.1}s)",
            generations.join(" "),
            elapsed.as_secs_f64()
        ),
    )
}

fn rlgp_plateau() -> Verdict {
    let (rlgp, mut lgp) = match (
        load_config(parameters("cart-pole-q.json"), Task::CartPole),
        load_config(parameters("cart-pole-lgp.json"), Task::CartPole),
    ) {
        (Ok(q), Ok(l)) => (q, l),
        (Err(e), _) | (_, Err(e)) => return verdict(false, e.to_string()),
    };
    if rlgp.q_params.is_none() {
        return verdict(false, "cart-pole-q.json has no q_params");
    }
    lgp.n_generations = rlgp.n_generations;
    let (mut q_best, mut q_mean, mut l_mean, mut wins) = (Vec::new(), Vec::new(), Vec::new(), 0);
    for seed in SEEDS {
        let (q, l) = match (
            final_best(&rlgp, Task::CartPole, seed),
            final_best(&lgp, Task::CartPole, seed),
        ) {
            (Ok(q), Ok(l)) => (q, l),
            (Err(e), _) | (_, Err(e)) => return verdict(false, e),
        };
        wins += usize::from(l.0 >= q.0);
        q_best.push(q.0);
        q_mean.push(q.1);
        l_mean.push(l.1);
    }
    let rlgp_median = median(&q_best);
    verdict(
        rlgp_median > 0.0 && wins >= 7,
        format!(
            "RLGP median best {rlgp_median:.1}; LGP >= RLGP in {wins}/10 seeds; median population mean LGP {:.1} vs RLGP {:.1}",
            median(&l_mean),
            median(&q_mean)
        ),
    )
}

/// LGP MountainCar fitness that records every episode score outside [-200, -1].
struct BoundedEpisodes {
    h: Hyperparameters,
    episodes: AtomicUsize,
    violations: AtomicUsize,
}

impl FitnessEngine<f64> for BoundedEpisodes {
    fn evaluate(&self, individual: &mut Individual<f64>, rng: &mut RngStream) -> f64 {
        let scores =
            episode_scores::<f64, MountainCar<f64>, _>(&mut individual.program, &self.h, rng).expect("episodes run");
        self.episodes.fetch_add(scores.len(), Ordering::Relaxed);
        let bad = scores.iter().filter(|s| !(-200.0..=-1.0).contains(*s)).count();
        self.violations.fetch_add(bad, Ordering::Relaxed);
        scores.iter().sum::<f64>() / scores.len() as f64
    }

    fn is_stochastic(&self) -> bool {
        true
    }
}

fn mountain_car_bounds() -> Verdict {
    let start = Instant::now();
    let h = match load_config(parameters("mountain-car-lgp.json"), Task::MountainCar) {
        Ok(h) => h,
        Err(e) => return verdict(false, e.to_string()),
    };
    if h.n_generations > 100 {
        return verdict(false, "parameters run past 100 generations");
    }
    let engine = BoundedEpisodes {
        h: h.clone(),
        episodes: AtomicUsize::new(0),
        violations: AtomicUsize::new(0),
    };
    let mut best = Vec::new();
    for seed in SEEDS {
        match evolve_with::<f64, _, _>(&h, &engine, seed, EvolveOptions::default(), |_, _| {}) {
            Ok((_, series)) => best.push(series.iter().map(|r| r.max).fold(f64::NEG_INFINITY, f64::max)),
            Err(e) => return verdict(false, e.to_string()),
        }
    }
    let elapsed = start.elapsed();
    let (episodes, violations) = (engine.episodes.into_inner(), engine.violations.into_inner());
    let good = best.iter().filter(|b| **b >= -130.0).count();
    let listing: Vec<String> = best.iter().map(|b| format!("{b:.1}")).collect();
    verdict(
        violations == 0 && good >= 5 && elapsed <= Duration::from_secs(600),
        format!(
            "{violations} of {episodes} episode scores outside [-200, -1]; best-of-run >= -130 in {good}/10 ({}); {:.1}s",
            listing.join(" "),
            elapsed.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Verdict);
    let criteria: [Criterion; 10] = [
        ("q-update oracle", q_update_oracle),
        ("physics golden trajectories", physics_golden),
        ("operator closure", operator_closure),
        ("run determinism", determinism),
        ("elitism monotonicity", elitism),
        ("q-update structure", q_structure),
        ("iris operator matrix", iris_matrix),
        ("cart-pole solvability", cart_pole_solved),
        ("rlgp plateau", rlgp_plateau),
        ("mountain-car bounds", mountain_car_bounds),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let v = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| verdict(false, "panicked"));
        failures += usize::from(!v.pass);
        println!(
            "criterion {:>2} {} [{name}]: {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
