use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use rlgp::config::{load_config, load_config_with_overlay, Hyperparameters, Task};
use rlgp::engine::EvolveOptions;
use rlgp::experiment::{
    aggregate_to_csv, emit_plot, evolve_task, load_space, random_search, read_aggregate_csv, run_batch,
};
use rlgp::rng::entropy_seed;

#[derive(Parser)]
#[command(
    name = "rlgp",
    version,
    about = "Linear genetic programming with optional Q-learning action selection"
)]
struct Cli {
    /// Worker threads for parallel evaluation (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded batch of experiments and write the aggregate outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Q-learning overlay merged over the base configuration.
        #[arg(long)]
        q_config: Option<PathBuf>,
        #[arg(long)]
        task: Task,
        #[arg(long, default_value_t = 1)]
        experiments: usize,
        /// Base seed; falls back to the configuration's seed, then to entropy.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Random-search hyperparameters over a search-space file.
    Tune {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        task: Task,
        #[arg(long)]
        budget: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Render an aggregate CSV as an SVG chart.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a configuration file and report every violation.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        q_config: Option<PathBuf>,
        /// Task supplying defaults and the expected widths; inferred from
        /// the file's `n_inputs`/`n_actions` when omitted.
        #[arg(long)]
        task: Option<Task>,
    },
    /// Evolve once and print the best program.
    ShowBest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        q_config: Option<PathBuf>,
        #[arg(long)]
        task: Task,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(config: &Path, q_config: Option<&Path>, task: Task) -> Result<Hyperparameters> {
    let h = match q_config {
        Some(q) => load_config_with_overlay(config, q, task)?,
        None => load_config(config, task)?,
    };
    Ok(h)
}

/// The task whose widths match the file, cart-pole when nothing decides.
fn infer_task(config: &Path) -> Result<Task> {
    let text = fs::read_to_string(config).with_context(|| format!("cannot read {}", config.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("malformed configuration {}", config.display()))?;
    let width = |key: &str| value.get(key).and_then(serde_json::Value::as_u64).map(|v| v as usize);
    let (inputs, actions) = (width("n_inputs"), width("n_actions"));
    let task = Task::ALL
        .into_iter()
        .find(|t| inputs.is_some_and(|n| n == t.n_inputs()) && actions.is_none_or(|n| n == t.n_actions()))
        .unwrap_or(Task::CartPole);
    Ok(task)
}

fn resolve_seed(flag: Option<u64>, h: &Hyperparameters) -> u64 {
    flag.or(h.seed).unwrap_or_else(|| {
        let seed = entropy_seed();
        log::info!("no seed given, drew {seed} from system entropy");
        seed
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            q_config,
            task,
            experiments,
            seed,
            out_dir,
        } => {
            let mut h = load(&config, q_config.as_deref(), task)?;
            let seed = resolve_seed(seed, &h);
            h.seed = Some(seed);
            let outcome = run_batch(&h, task, experiments, seed, EvolveOptions::default())?;
            create_dir(&out_dir)?;
            aggregate_to_csv(&outcome.result, out_dir.join("aggregate.csv"))?;
            if !outcome.result.rows.is_empty() {
                emit_plot(&outcome.result.rows, out_dir.join("plot.svg"))?;
            }
            let best = &outcome.best;
            let mut text = format!("# seed {} fitness {}\n{}", best.seed, best.fitness, best.program);
            if !text.ends_with('\n') {
                text.push('\n');
            }
            write(&out_dir.join("best_program.txt"), &text)?;
            let meta = serde_json::to_string_pretty(&outcome.result.meta)?;
            write(&out_dir.join("run_meta.json"), &(meta + "\n"))?;
            if let Some(last) = outcome.result.rows.last() {
                println!(
                    "{task}: {experiments} experiment(s), generation {} mean max {:.6}, best {:.6} (seed {})",
                    last.generation, last.max, best.fitness, best.seed
                );
            }
        }
        Command::Tune {
            space,
            task,
            budget,
            seed,
            out_dir,
        } => {
            let space = load_space(&space, task)?;
            let seed = resolve_seed(seed, &space.base);
            let outcome = random_search(&space, task, budget, seed)?;
            create_dir(&out_dir)?;
            write(&out_dir.join("trials.csv"), &outcome.trial_log_csv(&space))?;
            let mut best = outcome.best.clone();
            best.seed = None;
            write(&out_dir.join("best_config.json"), &(best.to_json_pretty() + "\n"))?;
            println!("best objective {:.6} over {budget} trial(s)", outcome.best_objective);
        }
        Command::Plot { input, out } => {
            let rows = read_aggregate_csv(&input)?;
            emit_plot(&rows, &out)?;
        }
        Command::ValidateConfig { config, q_config, task } => {
            let task = match task {
                Some(t) => t,
                None => infer_task(&config)?,
            };
            load(&config, q_config.as_deref(), task)?;
            println!("{}: valid for {task}", config.display());
        }
        Command::ShowBest {
            config,
            q_config,
            task,
            seed,
        } => {
            let h = load(&config, q_config.as_deref(), task)?;
            let seed = resolve_seed(seed, &h);
            let (population, _) = evolve_task(&h, task, seed, EvolveOptions::default(), |_, _| {})?;
            let Some(best) = population.best() else {
                bail!("the population is empty");
            };
            println!("# seed {seed} fitness {}", best.fitness.unwrap_or(h.default_fitness));
            print!("{}", best.program);
            if !best.program.to_string().ends_with('\n') {
                println!();
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
