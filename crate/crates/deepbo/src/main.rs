use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use deepbo::config::{AlgorithmKind, EtrKindConfig, ExperimentConfig, SyntheticConfig};
use deepbo::report::{parse_grid, report, Source};
use deepbo::runner::{Experiment, ResultsFile};
use deepbo::table_io::save_table;
use deepbo_core::engine::{Dispatch, DuplicateStrategy};
use deepbo_core::tabular::CurveModel;

/// Diversified, early-terminating parallel Bayesian optimization on tabular benchmarks.
#[derive(Parser)]
#[command(name = "deepbo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic surrogate table (JSON lines).
    GenBenchmark(GenArgs),
    /// Run repeated trials of one experimental setting and write a results CSV.
    Run(Box<RunArgs>),
    /// Summarise results files as success rates and expected times.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Experiment config whose `[benchmark.synthetic]` block is used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_epoch: Option<usize>,
    #[arg(long)]
    late_fraction: Option<f64>,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Table file; replaces any benchmark block in the config.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, value_parser = ["portfolio", "single", "gp-hedge", "random"])]
    algorithm: Option<String>,
    /// Comma-separated portfolio arms, e.g. `gp-ei,rf-ucb`.
    #[arg(long)]
    arms: Option<String>,
    /// Arm for `--algorithm single`.
    #[arg(long)]
    arm: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_parser = ["none", "cr", "msr"])]
    etr: Option<String>,
    #[arg(long, value_parser = ["naive", "random", "next_candidate", "in_progress"])]
    duplicates: Option<String>,
    #[arg(long)]
    synchronous: bool,
    #[arg(long, conflicts_with = "target_accuracy")]
    target_top_k: Option<usize>,
    #[arg(long)]
    target_accuracy: Option<f64>,
    #[arg(long)]
    n_trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Virtual seconds per trial.
    #[arg(long)]
    time_budget: Option<f64>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(required = true)]
    results: Vec<PathBuf>,
    /// Comma-separated times in seconds; `inf` is allowed.
    #[arg(long, default_value = "3600,14400,43200,86400,inf")]
    t_grid: String,
    /// Add a theoretical-diversity column for this many parallel runs.
    #[arg(long)]
    diversity: Option<usize>,
    /// Pool all files into one ensemble (fingerprints must match).
    #[arg(long)]
    merge: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenBenchmark(a) => gen_benchmark(a),
        Command::Run(a) => run(*a),
        Command::Report(a) => run_report(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: Option<&Path>) -> anyhow::Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(ExperimentConfig::default()),
    }
}

fn gen_benchmark(a: GenArgs) -> anyhow::Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let mut synth = cfg.benchmark.synthetic.unwrap_or(SyntheticConfig {
        n: 0,
        seed: 0,
        space: None,
        curve: CurveModel::default(),
    });
    if let Some(n) = a.n {
        synth.n = n;
    }
    if let Some(s) = a.seed {
        synth.seed = s;
    }
    if let Some(e) = a.max_epoch {
        synth.curve.max_epoch = e;
    }
    if let Some(f) = a.late_fraction {
        synth.curve.late_bloomer_fraction = f;
    }
    if synth.n == 0 {
        bail!("no table size given: pass --n or a config with [benchmark.synthetic]");
    }
    let table = synth.generate()?;
    save_table(&table, &a.output)?;
    Ok(())
}

fn run(a: RunArgs) -> anyhow::Result<()> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(t) = a.table {
        cfg.benchmark.table = Some(t);
        cfg.benchmark.synthetic = None;
    }
    if let Some(kind) = a.algorithm.as_deref() {
        cfg.algorithm.kind = match kind {
            "portfolio" => AlgorithmKind::Portfolio,
            "single" => AlgorithmKind::Single,
            "gp-hedge" => AlgorithmKind::GpHedge,
            _ => AlgorithmKind::Random,
        };
    }
    if let Some(arms) = a.arms {
        cfg.algorithm.arms = Some(arms.split(',').map(|s| s.trim().to_string()).collect());
    }
    if a.arm.is_some() {
        cfg.algorithm.arm = a.arm;
    }
    if let Some(k) = a.kappa {
        cfg.algorithm.kappa = k;
    }
    if let Some(m) = a.workers {
        cfg.workers = m;
    }
    if let Some(v) = a.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = a.beta {
        cfg.beta = v;
    }
    if let Some(etr) = a.etr.as_deref() {
        cfg.etr.kind = match etr {
            "cr" => EtrKindConfig::Cr,
            "msr" => EtrKindConfig::Msr,
            _ => EtrKindConfig::None,
        };
        cfg.etr.checkpoints.clear();
    }
    if let Some(d) = a.duplicates.as_deref() {
        cfg.duplicates = match d {
            "naive" => DuplicateStrategy::Naive,
            "random" => DuplicateStrategy::Random,
            "next_candidate" => DuplicateStrategy::NextCandidate,
            _ => DuplicateStrategy::InProgress,
        };
    }
    if a.synchronous {
        cfg.dispatch = Dispatch::Synchronous;
    }
    if let Some(k) = a.target_top_k {
        cfg.target.top_k = Some(k);
        cfg.target.accuracy = None;
    }
    if let Some(c) = a.target_accuracy {
        cfg.target.accuracy = Some(c);
        cfg.target.top_k = None;
    }
    if let Some(n) = a.n_trials {
        cfg.n_trials = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.time_budget.is_some() {
        cfg.time_budget = a.time_budget;
    }

    let experiment = Experiment::new(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.threads.unwrap_or(0)).build()?;
    let results = pool.install(|| experiment.run())?;
    let file = File::create(&a.output).with_context(|| format!("creating {}", a.output.display()))?;
    let mut out = BufWriter::new(file);
    experiment.write_results(&results, &mut out)?;
    out.flush()?;
    Ok(())
}

fn run_report(a: ReportArgs) -> anyhow::Result<()> {
    let grid = parse_grid(&a.t_grid)?;
    let sources = a
        .results
        .iter()
        .map(|p| Ok(Source { name: p.display().to_string(), results: ResultsFile::load(p)? }))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let text = report(&sources, &grid, a.diversity, a.merge)?;
    match a.output {
        Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
