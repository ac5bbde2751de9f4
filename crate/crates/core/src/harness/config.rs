//! `key = value` configuration files for `bench` and `experiment` runs.
//!
//! ```text
//! # DSJC500.5 row of the benchmark table
//! variant = bench
//! registry = instances.txt
//! instance = DSJC500.5
//! k = 48
//! iter_tc = 8000
//! runs = 20
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::experiments::{
    experiment_fig1, experiment_sweep, CapPolicy, ExperimentCurve, Fig1Spec, SweepKind, SweepSpec,
};
use super::{run_batch, runs_csv, stats_csv, HarnessError, InstanceRegistry};
use crate::engine::H2OConfig;
use crate::graph::Graph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("config is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Bench,
    Fig1,
    RandomLevel,
    Imbalance,
    Replacement,
}

impl Variant {
    fn parse(s: &str) -> Option<Variant> {
        Some(match s {
            "bench" => Variant::Bench,
            "fig1" => Variant::Fig1,
            "random_level" => Variant::RandomLevel,
            "imbalance" => Variant::Imbalance,
            "replacement" => Variant::Replacement,
            _ => return None,
        })
    }

    fn sweep_kind(self) -> Option<SweepKind> {
        match self {
            Variant::RandomLevel => Some(SweepKind::RandomLevel),
            Variant::Imbalance => Some(SweepKind::Imbalance),
            Variant::Replacement => Some(SweepKind::Replacement),
            Variant::Bench | Variant::Fig1 => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub variant: Variant,
    /// Registry name, or a path to a DIMACS file when no registry is given.
    pub instance: String,
    pub registry: Option<PathBuf>,
    pub k: usize,
    pub iter_tc: u64,
    pub runs: usize,
    pub base_seed: u64,
    pub iter_cycle: u64,
    pub use_elites: bool,
    pub max_generations: Option<u64>,
    pub max_seconds: Option<f64>,
    pub threads: usize,
    pub parallel_runs: bool,
    pub x_grid: Vec<f64>,
    pub cap: CapPolicy,
    pub parent_fitness: usize,
    pub trajectories: usize,
    pub snapshots: usize,
    pub snapshot_gap: u64,
    pub pool_iters: u64,
    pub pairs: usize,
    pub bins: usize,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Line {
                    line: idx + 1,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            pairs.push((idx + 1, key.trim().to_string(), value.trim().to_string()));
        }
        if pairs.is_empty() {
            return Err(ConfigError::Empty);
        }

        let mut variant = None;
        let mut instance = None;
        let mut k = None;
        let mut iter_tc = None;
        let mut runs = None;
        let mut cfg = ExperimentConfig {
            variant: Variant::Bench,
            instance: String::new(),
            registry: None,
            k: 0,
            iter_tc: 0,
            runs: 0,
            base_seed: 0,
            iter_cycle: 10,
            use_elites: true,
            max_generations: None,
            max_seconds: None,
            threads: 2,
            parallel_runs: false,
            x_grid: Vec::new(),
            cap: CapPolicy::BaselineMultiple(10.0),
            parent_fitness: 0,
            trajectories: 20,
            snapshots: 10,
            snapshot_gap: 2000,
            pool_iters: 200_000,
            pairs: 2000,
            bins: 20,
            out_dir: PathBuf::from("results"),
        };

        for (line, key, value) in pairs {
            let err = |message: String| ConfigError::Line { line, message };
            let num = |v: &str| -> Result<u64, ConfigError> {
                v.parse()
                    .map_err(|_| err(format!("`{key}` expects an integer, got `{v}`")))
            };
            let float = |v: &str| -> Result<f64, ConfigError> {
                v.parse()
                    .map_err(|_| err(format!("`{key}` expects a number, got `{v}`")))
            };
            let flag = |v: &str| -> Result<bool, ConfigError> {
                match v {
                    "true" | "yes" | "1" => Ok(true),
                    "false" | "no" | "0" => Ok(false),
                    _ => Err(err(format!("`{key}` expects true or false, got `{v}`"))),
                }
            };
            match key.as_str() {
                "variant" => {
                    variant = Some(
                        Variant::parse(&value)
                            .ok_or_else(|| err(format!("unknown variant `{value}`")))?,
                    )
                }
                "instance" => instance = Some(value),
                "registry" => cfg.registry = Some(PathBuf::from(value)),
                "k" => k = Some(num(&value)? as usize),
                "iter_tc" => iter_tc = Some(num(&value)?),
                "runs" => runs = Some(num(&value)? as usize),
                "base_seed" => cfg.base_seed = num(&value)?,
                "iter_cycle" => cfg.iter_cycle = num(&value)?,
                "elites" => cfg.use_elites = flag(&value)?,
                "max_generations" => cfg.max_generations = Some(num(&value)?),
                "max_seconds" => cfg.max_seconds = Some(float(&value)?),
                "threads" => cfg.threads = num(&value)? as usize,
                "parallel_runs" => cfg.parallel_runs = flag(&value)?,
                "x_grid" => {
                    cfg.x_grid = value
                        .split(',')
                        .map(|v| float(v.trim()))
                        .collect::<Result<_, _>>()?
                }
                "cap" => {
                    cfg.cap = match value.strip_suffix('x') {
                        Some(factor) => CapPolicy::BaselineMultiple(float(factor)?),
                        None => CapPolicy::Fixed(num(&value)?),
                    }
                }
                "parent_fitness" => cfg.parent_fitness = num(&value)? as usize,
                "trajectories" => cfg.trajectories = num(&value)? as usize,
                "snapshots" => cfg.snapshots = num(&value)? as usize,
                "snapshot_gap" => cfg.snapshot_gap = num(&value)?,
                "pool_iters" => cfg.pool_iters = num(&value)?,
                "pairs" => cfg.pairs = num(&value)? as usize,
                "bins" => cfg.bins = num(&value)? as usize,
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }

        cfg.variant = variant.ok_or(ConfigError::Missing("variant"))?;
        cfg.instance = instance.ok_or(ConfigError::Missing("instance"))?;
        cfg.k = k.ok_or(ConfigError::Missing("k"))?;
        if cfg.variant == Variant::Fig1 {
            cfg.iter_tc = iter_tc.unwrap_or(0);
        } else {
            cfg.iter_tc = iter_tc.ok_or(ConfigError::Missing("iter_tc"))?;
        }
        if cfg.variant.sweep_kind().is_some() && cfg.x_grid.is_empty() {
            return Err(ConfigError::Missing("x_grid"));
        }
        cfg.runs = runs.unwrap_or(if cfg.variant == Variant::Bench {
            20
        } else {
            10
        });
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentConfig, HarnessError> {
        let path = path.as_ref();
        let mut cfg = Self::parse(&fs::read_to_string(path)?)?;
        // Relative paths inside a config resolve against its directory.
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(reg) = &cfg.registry {
            if reg.is_relative() {
                cfg.registry = Some(base.join(reg));
            }
        } else if Path::new(&cfg.instance).is_relative() {
            cfg.instance = base.join(&cfg.instance).to_string_lossy().into_owned();
        }
        Ok(cfg)
    }

    pub fn load_graph(&self) -> Result<Graph, HarnessError> {
        match &self.registry {
            Some(reg) => InstanceRegistry::load(reg)?.load_graph(&self.instance),
            None => Ok(Graph::load_dimacs(&self.instance)?),
        }
    }

    pub fn engine_config(&self) -> H2OConfig {
        H2OConfig {
            iter_cycle: self.iter_cycle,
            use_elites: self.use_elites,
            max_generations: self.max_generations,
            max_seconds: self.max_seconds,
            threads: self.threads,
            ..H2OConfig::new(self.k, self.iter_tc)
        }
    }

    pub fn fig1_spec(&self) -> Fig1Spec {
        Fig1Spec {
            trajectories: self.trajectories,
            snapshots_per_trajectory: self.snapshots,
            snapshot_gap: self.snapshot_gap,
            max_iters_per_trajectory: self.pool_iters,
            pair_count: self.pairs,
            bins: self.bins,
            base_seed: self.base_seed,
            ..Fig1Spec::new(self.k, self.parent_fitness)
        }
    }

    /// Runs the configured job, writes its CSV files into `out_dir` and
    /// returns a human-readable summary.
    pub fn execute(&self) -> Result<String, HarnessError> {
        let g = self.load_graph()?;
        fs::create_dir_all(&self.out_dir)?;
        let engine = self.engine_config();
        match self.variant {
            Variant::Bench => {
                let batch = run_batch(&g, &engine, self.runs, self.base_seed, self.parallel_runs)?;
                fs::write(self.out_dir.join("runs.csv"), runs_csv(&batch.records))?;
                let stats = stats_csv(std::slice::from_ref(&batch.stats));
                fs::write(self.out_dir.join("stats.csv"), &stats)?;
                Ok(stats)
            }
            Variant::Fig1 => {
                let (curve, points) = experiment_fig1(&g, &self.fig1_spec())?;
                let mut raw = String::from("distance,child_fitness,same_trajectory\n");
                for p in &points {
                    raw.push_str(&format!(
                        "{},{},{}\n",
                        p.distance, p.child_fitness, p.same_trajectory
                    ));
                }
                fs::write(self.out_dir.join("points_fig1.csv"), raw)?;
                self.write_curve(&curve, points.len())
            }
            variant => {
                let spec = SweepSpec {
                    kind: variant.sweep_kind().expect("sweep variant"),
                    x_grid: self.x_grid.clone(),
                    runs_per_x: self.runs,
                    cap: self.cap,
                    base_seed: self.base_seed,
                    parallel_runs: self.parallel_runs,
                };
                let curve = experiment_sweep(&g, &engine, &spec)?;
                let all: Vec<_> = curve.runs.iter().flatten().cloned().collect();
                fs::write(
                    self.out_dir.join(format!("runs_{}.csv", curve.name)),
                    runs_csv(&all),
                )?;
                self.write_curve(&curve, all.len())
            }
        }
    }

    fn write_curve(
        &self,
        curve: &ExperimentCurve,
        observations: usize,
    ) -> Result<String, HarnessError> {
        let csv = curve.to_csv();
        fs::write(self.out_dir.join(format!("curve_{}.csv", curve.name)), &csv)?;
        let mut summary = format!(
            "{} on {} ({} observations",
            curve.name, self.instance, observations
        );
        if let Some(cap) = curve.cap {
            summary.push_str(&format!(", cap {cap} iterations"));
        }
        if let Some(r) = curve.correlation() {
            summary.push_str(&format!(", pearson r {r:.3}"));
        }
        summary.push_str(")\n");
        summary.push_str(&csv);
        Ok(summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_sweep() {
        let cfg = ExperimentConfig::parse(
            "# sweep\nvariant = random_level\ninstance = flat.col\nk = 48\niter_tc = 8000\n\
             x_grid = 0, 1, 2,5\ncap = 10x\nelites = false\n",
        )
        .unwrap();
        assert_eq!(cfg.variant, Variant::RandomLevel);
        assert_eq!(cfg.x_grid, vec![0.0, 1.0, 2.0, 5.0]);
        assert_eq!(cfg.cap, CapPolicy::BaselineMultiple(10.0));
        assert_eq!(cfg.runs, 10);
        assert!(!cfg.engine_config().use_elites);
        assert_eq!(cfg.engine_config().iter_tc, 8000);
    }

    #[test]
    fn bench_defaults_to_twenty_runs() {
        let cfg = ExperimentConfig::parse("variant=bench\ninstance=x\nk=3\niter_tc=10\ncap=500\n")
            .unwrap();
        assert_eq!(cfg.runs, 20);
        assert_eq!(cfg.cap, CapPolicy::Fixed(500));
        let sweep = ExperimentConfig::parse(
            "variant=replacement\ninstance=x\nk=3\niter_tc=10\nx_grid=0.5\n",
        )
        .unwrap();
        assert_eq!(sweep.cap, CapPolicy::BaselineMultiple(10.0));
    }

    #[test]
    fn errors() {
        assert_eq!(ExperimentConfig::parse(""), Err(ConfigError::Empty));
        assert_eq!(
            ExperimentConfig::parse("# only a comment\n"),
            Err(ConfigError::Empty)
        );
        assert_eq!(
            ExperimentConfig::parse("variant=bench\nk = x\n")
                .unwrap_err()
                .to_string(),
            "line 2: `k` expects an integer, got `x`"
        );
        assert_eq!(
            ExperimentConfig::parse("variant=bench\nwhat=1\n")
                .unwrap_err()
                .to_string(),
            "line 2: unknown key `what`"
        );
        assert_eq!(
            ExperimentConfig::parse("variant=bench\ninstance=x\nk=3\n"),
            Err(ConfigError::Missing("iter_tc"))
        );
        assert_eq!(
            ExperimentConfig::parse("variant=imbalance\ninstance=x\nk=3\niter_tc=5\n"),
            Err(ConfigError::Missing("x_grid"))
        );
        assert!(ExperimentConfig::parse("variant=nope\n").is_err());
        assert!(ExperimentConfig::parse("just words\n").is_err());
    }

    #[test]
    fn executes_bench_from_a_dimacs_path() {
        let dir = tempfile::tempdir().unwrap();
        let graph = dir.path().join("p.col");
        fs::write(&graph, crate::graph::petersen_graph().to_dimacs()).unwrap();
        let out = dir.path().join("out");
        let text = format!(
            "variant=bench\ninstance={}\nk=3\niter_tc=200\nruns=3\nmax_generations=50\nout_dir={}\n",
            graph.display(),
            out.display()
        );
        let summary = ExperimentConfig::parse(&text).unwrap().execute().unwrap();
        assert!(summary.contains("p,3,200,3,3,"), "{summary}");
        let runs = super::super::parse_runs_csv(&fs::read_to_string(out.join("runs.csv")).unwrap())
            .unwrap();
        assert_eq!(runs.len(), 3);
    }
}
