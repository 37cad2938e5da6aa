//! Runs the trials of an experiment and reads/writes the results CSV.
//!
//! The CSV starts with one `#` metadata line of `key=value` pairs, then the
//! header `trial_index,seed,tau_seconds,evals_started,evals_terminated,evals_completed,duplicates_resolved`.
//! `tau_seconds` has three decimals and is empty for censored trials.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use deepbo_core::engine::{run_trial, TrialResult};
use deepbo_core::tabular::SurrogateTable;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{BenchmarkConfig, ExperimentConfig};
use crate::error::{io_err, Error, Result};
use crate::table_io::write_table;

pub const RESULTS_HEADER: &str =
    "trial_index,seed,tau_seconds,evals_started,evals_terminated,evals_completed,duplicates_resolved";

/// Hash of everything that defines the experimental setting: the config
/// without its seed and trial count, and the table contents.
pub fn fingerprint(cfg: &ExperimentConfig, table: &SurrogateTable) -> Result<String> {
    let mut canonical = cfg.clone();
    canonical.seed = 0;
    canonical.n_trials = 1;
    canonical.benchmark = BenchmarkConfig::default();
    let mut h = Sha256::new();
    h.update(canonical.to_toml().as_bytes());
    let mut bytes = Vec::new();
    write_table(table, &mut bytes)?;
    h.update(&bytes);
    let digest = h.finalize();
    Ok(digest[..8].iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

pub struct Experiment {
    pub config: ExperimentConfig,
    pub table: SurrogateTable,
    pub target: f64,
    pub fingerprint: String,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let table = config.load_benchmark()?;
        Self::with_table(config, table)
    }

    pub fn with_table(config: ExperimentConfig, table: SurrogateTable) -> Result<Self> {
        config.validate()?;
        // surfaces table-dependent errors before any trial starts
        config.trial_settings(&table, config.seed)?;
        let target = config.target_accuracy(&table)?;
        let fingerprint = fingerprint(&config, &table)?;
        Ok(Self { config, table, target, fingerprint })
    }

    pub fn seed(&self, trial_index: usize) -> u64 {
        self.config.seed.wrapping_add(trial_index as u64)
    }

    /// Runs all trials; results are in trial-index order whatever order the
    /// threads finish in.
    pub fn run(&self) -> Result<Vec<TrialResult>> {
        (0..self.config.n_trials)
            .into_par_iter()
            .map(|i| {
                let settings = self.config.trial_settings(&self.table, self.seed(i))?;
                Ok(run_trial(&self.table, settings)?)
            })
            .collect()
    }

    pub fn metadata(&self) -> BTreeMap<String, String> {
        let c = &self.config;
        let algorithm = match &c.algorithm.kind {
            crate::config::AlgorithmKind::Portfolio => "portfolio",
            crate::config::AlgorithmKind::Single => "single",
            crate::config::AlgorithmKind::GpHedge => "gp-hedge",
            crate::config::AlgorithmKind::Random => "random",
        };
        [
            ("fingerprint", self.fingerprint.clone()),
            ("algorithm", algorithm.to_string()),
            ("workers", c.workers.to_string()),
            ("target", format!("{}", self.target)),
            ("n_trials", c.n_trials.to_string()),
            ("seed", c.seed.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn write_results<W: Write>(&self, results: &[TrialResult], mut out: W) -> std::io::Result<()> {
        let meta: Vec<String> = self.metadata().iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "# deepbo-results {}", meta.join(" "))?;
        writeln!(out, "{RESULTS_HEADER}")?;
        for (i, r) in results.iter().enumerate() {
            let tau = r.tau.map(|t| format!("{t:.3}")).unwrap_or_default();
            writeln!(
                out,
                "{i},{},{tau},{},{},{},{}",
                r.seed, r.evals_started, r.evals_terminated, r.evals_completed, r.duplicates_resolved
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub trial_index: usize,
    pub seed: u64,
    pub tau_seconds: Option<f64>,
    pub evals_started: usize,
    pub evals_terminated: usize,
    pub evals_completed: usize,
    pub duplicates_resolved: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultsFile {
    pub metadata: BTreeMap<String, String>,
    pub rows: Vec<ResultRow>,
}

impl ResultsFile {
    pub fn fingerprint(&self) -> &str {
        self.metadata.get("fingerprint").map_or("", String::as_str)
    }

    pub fn taus(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.tau_seconds).collect()
    }

    pub fn parse<R: BufRead>(input: R) -> Result<Self> {
        let mut metadata = BTreeMap::new();
        let mut rows = Vec::new();
        let mut saw_header = false;
        for (i, line) in input.lines().enumerate() {
            let n = i + 1;
            let line = line.map_err(|e| Error::Parse { line: n, message: e.to_string() })?;
            if let Some(rest) = line.strip_prefix('#') {
                for pair in rest.split_whitespace().filter_map(|p| p.split_once('=')) {
                    metadata.insert(pair.0.to_string(), pair.1.to_string());
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            if !saw_header {
                if line != RESULTS_HEADER {
                    return Err(Error::Parse { line: n, message: format!("expected header {RESULTS_HEADER:?}") });
                }
                saw_header = true;
                continue;
            }
            rows.push(parse_row(&line).map_err(|message| Error::Parse { line: n, message })?);
        }
        if !saw_header {
            return Err(Error::Results("results file has no header".into()));
        }
        Ok(Self { metadata, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(io_err(path))?;
        Self::parse(std::io::BufReader::new(file)).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
            other => other,
        })
    }
}

fn parse_row(line: &str) -> Result<ResultRow, String> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 7 {
        return Err(format!("expected 7 fields, found {}", f.len()));
    }
    fn num<T: std::str::FromStr>(s: &str, name: &str) -> Result<T, String> {
        s.parse().map_err(|_| format!("{name}: cannot parse {s:?}"))
    }
    Ok(ResultRow {
        trial_index: num(f[0], "trial_index")?,
        seed: num(f[1], "seed")?,
        tau_seconds: if f[2].is_empty() { None } else { Some(num(f[2], "tau_seconds")?) },
        evals_started: num(f[3], "evals_started")?,
        evals_terminated: num(f[4], "evals_terminated")?,
        evals_completed: num(f[5], "evals_completed")?,
        duplicates_resolved: num(f[6], "duplicates_resolved")?,
    })
}
