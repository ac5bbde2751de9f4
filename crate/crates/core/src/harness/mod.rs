//! Batch runs, benchmark statistics and the diversification experiments.
//!
//! Per-run records are the source of truth: every aggregate is derived
//! from them and can be recomputed from a persisted `runs.csv`.

pub mod config;
pub mod experiments;
pub mod stats;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{run, EngineError, H2OConfig};
use crate::graph::{Graph, GraphError};

pub use config::{ExperimentConfig, Variant};
pub use experiments::{
    experiment_fig1, experiment_sweep, CapPolicy, CurvePoint, ExperimentCurve, Fig1Spec, SweepKind,
    SweepSpec,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("registry line {line}: {message}")]
    Registry { line: usize, message: String },
    #[error("batch has no runs")]
    EmptyBatch,
    #[error("parameter grid value {value} is invalid: {reason}")]
    Grid { value: f64, reason: String },
    #[error("baseline found no legal coloring, so no cap can be derived")]
    NoBaseline,
    #[error("only {found} colorings with fitness {target} collected (need at least 2)")]
    PoolTimeout { target: usize, found: usize },
    #[error("runs.csv line {line}: {message}")]
    RunLog { line: usize, message: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// One entry of an instance registry file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceEntry {
    pub name: String,
    pub known_best_k: usize,
    pub path: PathBuf,
}

/// Instance registry: one `name k path` line per instance, `#` comments.
/// Relative paths resolve against the registry file's directory.
#[derive(Debug, Clone, Default)]
pub struct InstanceRegistry {
    entries: Vec<InstanceEntry>,
}

impl InstanceRegistry {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| HarnessError::Registry {
                line: idx + 1,
                message: message.to_string(),
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [name, k, path] = parts.as_slice() else {
                return Err(err("expected `name k path`"));
            };
            let known_best_k = k.parse().map_err(|_| err("k is not an integer"))?;
            let path = Path::new(path);
            entries.push(InstanceEntry {
                name: name.to_string(),
                known_best_k,
                path: if path.is_absolute() {
                    path.to_path_buf()
                } else {
                    base_dir.join(path)
                },
            });
        }
        Ok(InstanceRegistry { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn get(&self, name: &str) -> Result<&InstanceEntry, HarnessError> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| HarnessError::UnknownInstance(name.to_string()))
    }

    pub fn entries(&self) -> &[InstanceEntry] {
        &self.entries
    }

    pub fn load_graph(&self, name: &str) -> Result<Graph, HarnessError> {
        let entry = self.get(name)?;
        Ok(Graph::load_dimacs(&entry.path)?.with_name(&entry.name))
    }
}

/// Outcome of one engine run inside a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub k: usize,
    pub seed: u64,
    pub found: bool,
    pub generations: u64,
    pub iterations: u64,
    pub seconds: f64,
}

pub const RUNS_CSV_HEADER: &str = "instance,k,seed,found,generations,iterations,seconds";

impl RunRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6}",
            self.instance,
            self.k,
            self.seed,
            self.found,
            self.generations,
            self.iterations,
            self.seconds
        )
    }
}

pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(RUNS_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Reads back the output of [`runs_csv`].
pub fn parse_runs_csv(text: &str) -> Result<Vec<RunRecord>, HarnessError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == RUNS_CSV_HEADER => {}
        _ => {
            return Err(HarnessError::RunLog {
                line: 1,
                message: "missing header".into(),
            })
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| HarnessError::RunLog {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split(',').collect();
        let [instance, k, seed, found, generations, iterations, seconds] = fields.as_slice() else {
            return Err(err(format!("expected 7 fields, got {}", fields.len())));
        };
        let bad = |what: &str, v: &str| err(format!("bad {what} `{v}`"));
        records.push(RunRecord {
            instance: instance.to_string(),
            k: k.parse().map_err(|_| bad("k", k))?,
            seed: seed.parse().map_err(|_| bad("seed", seed))?,
            found: found.parse().map_err(|_| bad("found", found))?,
            generations: generations
                .parse()
                .map_err(|_| bad("generations", generations))?,
            iterations: iterations
                .parse()
                .map_err(|_| bad("iterations", iterations))?,
            seconds: seconds.parse().map_err(|_| bad("seconds", seconds))?,
        });
    }
    Ok(records)
}

/// One row of a benchmark table. Means cover successful runs only and are
/// `None` when no run succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub instance: String,
    pub k: usize,
    pub iter_tc: u64,
    pub success_count: usize,
    pub run_count: usize,
    pub mean_generations: Option<f64>,
    pub mean_total_iterations: Option<f64>,
    pub mean_seconds: Option<f64>,
}

pub const STATS_CSV_HEADER: &str =
    "instance,k,iter_tc,success,runs,mean_generations,mean_iterations,mean_seconds";

impl StatsRow {
    pub fn from_records(instance: &str, k: usize, iter_tc: u64, records: &[RunRecord]) -> StatsRow {
        let successes: Vec<&RunRecord> = records.iter().filter(|r| r.found).collect();
        let over = |f: fn(&RunRecord) -> f64| {
            stats::mean(&successes.iter().map(|r| f(r)).collect::<Vec<_>>())
        };
        StatsRow {
            instance: instance.to_string(),
            k,
            iter_tc,
            success_count: successes.len(),
            run_count: records.len(),
            mean_generations: over(|r| r.generations as f64),
            mean_total_iterations: over(|r| r.iterations as f64),
            mean_seconds: over(|r| r.seconds),
        }
    }

    pub fn success_label(&self) -> String {
        format!("{}/{}", self.success_count, self.run_count)
    }

    pub fn csv_row(&self) -> String {
        let opt =
            |v: Option<f64>, digits: usize| v.map(|x| format!("{x:.digits$}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.instance,
            self.k,
            self.iter_tc,
            self.success_count,
            self.run_count,
            opt(self.mean_generations, 2),
            opt(self.mean_total_iterations, 1),
            opt(self.mean_seconds, 3)
        )
    }
}

pub fn stats_csv(rows: &[StatsRow]) -> String {
    let mut out = String::from(STATS_CSV_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(out, "{}", row.csv_row()).unwrap();
    }
    out
}

/// Per-run records and their aggregate.
#[derive(Debug, Clone)]
pub struct Batch {
    pub records: Vec<RunRecord>,
    pub stats: StatsRow,
}

/// Runs the engine `n_runs` times; run `i` uses seed `base_seed + i`.
/// With `parallel_runs`, runs are spread over the rayon pool; records stay
/// in seed order either way.
pub fn run_batch(
    g: &Graph,
    cfg: &H2OConfig,
    n_runs: usize,
    base_seed: u64,
    parallel_runs: bool,
) -> Result<Batch, HarnessError> {
    if n_runs == 0 {
        return Err(HarnessError::EmptyBatch);
    }
    cfg.validate()?;
    let one = |i: usize| -> Result<RunRecord, HarnessError> {
        let seed = base_seed + i as u64;
        let run_cfg = H2OConfig {
            seed,
            ..cfg.clone()
        };
        let result = run(g, &run_cfg, &mut ())?;
        Ok(RunRecord {
            instance: g.name().to_string(),
            k: cfg.k,
            seed,
            found: result.found,
            generations: result.generations,
            iterations: result.total_ls_iterations,
            seconds: result.elapsed.as_secs_f64(),
        })
    };
    let records: Vec<RunRecord> = if parallel_runs {
        (0..n_runs)
            .into_par_iter()
            .map(one)
            .collect::<Result<_, _>>()?
    } else {
        (0..n_runs).map(one).collect::<Result<_, _>>()?
    };
    let stats = StatsRow::from_records(g.name(), cfg.k, cfg.iter_tc, &records);
    Ok(Batch { records, stats })
}
