//! The crossover-distance experiment and the three diversification sweeps.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::stats::{mean, pearson, std_error};
use super::{run_batch, HarnessError, RunRecord};
use crate::coloring::{conflicts, partition_distance, random_coloring_with, Coloring};
use crate::engine::H2OConfig;
use crate::gpx::{gpx, CrossoverKind};
use crate::graph::Graph;
use crate::tabucol::{TabuColParams, TabuSearch};

/// One grid point of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    /// Mean of the successful observations; `None` for a censored point.
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub n_success: usize,
    pub n_censored: usize,
}

impl CurvePoint {
    fn from_values(x: f64, values: &[f64], n_censored: usize) -> CurvePoint {
        CurvePoint {
            x,
            mean: mean(values),
            stderr: std_error(values),
            n_success: values.len(),
            n_censored,
        }
    }

    /// True when no observation at this point succeeded.
    pub fn is_censored(&self) -> bool {
        self.n_success == 0
    }
}

/// A parameter sweep result, ready for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCurve {
    pub name: String,
    pub points: Vec<CurvePoint>,
    /// Run logs behind each point, aligned with `points` (empty for fig1).
    pub runs: Vec<Vec<RunRecord>>,
    /// Iteration cap applied to every run, when there was one.
    pub cap: Option<u64>,
}

pub const CURVE_CSV_HEADER: &str = "x,mean,stderr,n_success,n_censored";

impl ExperimentCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let opt = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{}",
                p.x,
                opt(p.mean),
                opt(p.stderr),
                p.n_success,
                p.n_censored
            )
            .unwrap();
        }
        out
    }

    pub fn point(&self, x: f64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| (p.x - x).abs() < 1e-9)
    }

    /// Pearson correlation between `x` and the means of uncensored points.
    pub fn correlation(&self) -> Option<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .points
            .iter()
            .filter_map(|p| p.mean.map(|m| (p.x, m)))
            .unzip();
        pearson(&xs, &ys)
    }
}

/// The engine parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// `x` random class transmissions at the start of each crossover.
    RandomLevel,
    /// `x` is the probability of drawing the first parent at each step.
    Imbalance,
    /// `x` is the probability that a worse child replaces its parent.
    Replacement,
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::RandomLevel => "random_level",
            SweepKind::Imbalance => "imbalance",
            SweepKind::Replacement => "replacement",
        }
    }

    /// The engine configuration for grid value `x`.
    pub fn configure(&self, base: &H2OConfig, x: f64) -> Result<H2OConfig, HarnessError> {
        let bad = |reason: &str| HarnessError::Grid {
            value: x,
            reason: reason.to_string(),
        };
        let mut cfg = base.clone();
        match self {
            SweepKind::RandomLevel => {
                if x < 0.0 || x.fract() != 0.0 || x > base.k as f64 {
                    return Err(bad("random level must be an integer in [0, k]"));
                }
                cfg.crossover = CrossoverKind::Randomized { level: x as usize };
            }
            SweepKind::Imbalance => {
                if !(0.0..=1.0).contains(&x) {
                    return Err(bad("probability must lie in [0, 1]"));
                }
                cfg.crossover = CrossoverKind::Imbalanced {
                    first_parent_prob: x,
                };
            }
            SweepKind::Replacement => {
                if !(0.0..=1.0).contains(&x) {
                    return Err(bad("probability must lie in [0, 1]"));
                }
                cfg.replacement_probability = x;
            }
        }
        Ok(cfg)
    }
}

/// How the per-run iteration cap of a sweep is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapPolicy {
    /// No iteration cap beyond the base configuration's budget.
    None,
    Fixed(u64),
    /// `factor ×` the mean iterations of the unmodified engine, measured
    /// first with the same runs and seeds.
    BaselineMultiple(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub x_grid: Vec<f64>,
    pub runs_per_x: usize,
    pub cap: CapPolicy,
    pub base_seed: u64,
    pub parallel_runs: bool,
}

/// Runs the engine `runs_per_x` times per grid value and records the mean
/// cumulative TabuCol iterations of the successful runs.
pub fn experiment_sweep(
    g: &Graph,
    base: &H2OConfig,
    spec: &SweepSpec,
) -> Result<ExperimentCurve, HarnessError> {
    // Reject bad grids before spending time on a baseline.
    let configs = spec
        .x_grid
        .iter()
        .map(|&x| spec.kind.configure(base, x))
        .collect::<Result<Vec<_>, _>>()?;

    let cap = match spec.cap {
        CapPolicy::None => None,
        CapPolicy::Fixed(cap) => Some(cap),
        CapPolicy::BaselineMultiple(factor) => {
            let standard = H2OConfig {
                crossover: CrossoverKind::Standard,
                replacement_probability: 1.0,
                ..base.clone()
            };
            let batch = run_batch(
                g,
                &standard,
                spec.runs_per_x,
                spec.base_seed,
                spec.parallel_runs,
            )?;
            let baseline = batch
                .stats
                .mean_total_iterations
                .ok_or(HarnessError::NoBaseline)?;
            Some((baseline * factor).ceil() as u64)
        }
    };

    let mut points = Vec::with_capacity(configs.len());
    let mut runs = Vec::with_capacity(configs.len());
    for (&x, cfg) in spec.x_grid.iter().zip(configs) {
        let cfg = H2OConfig {
            max_ls_iterations: cap.or(cfg.max_ls_iterations),
            ..cfg
        };
        let batch = run_batch(g, &cfg, spec.runs_per_x, spec.base_seed, spec.parallel_runs)?;
        let values: Vec<f64> = batch
            .records
            .iter()
            .filter(|r| r.found)
            .map(|r| r.iterations as f64)
            .collect();
        let censored = batch.records.len() - values.len();
        points.push(CurvePoint::from_values(x, &values, censored));
        runs.push(batch.records);
    }

    Ok(ExperimentCurve {
        name: spec.kind.name().to_string(),
        points,
        runs,
        cap,
    })
}

/// Settings of the child-fitness versus parent-distance experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Spec {
    pub k: usize,
    /// Fitness every parent must have.
    pub parent_fitness: usize,
    /// Independent TabuCol trajectories used to fill the pool.
    pub trajectories: usize,
    /// Snapshots kept per trajectory.
    pub snapshots_per_trajectory: usize,
    /// Minimum iterations between two snapshots of one trajectory.
    pub snapshot_gap: u64,
    /// TabuCol budget per trajectory.
    pub max_iters_per_trajectory: u64,
    /// Number of parent pairs crossed (all pairs if fewer exist).
    pub pair_count: usize,
    pub bins: usize,
    pub base_seed: u64,
}

impl Fig1Spec {
    pub fn new(k: usize, parent_fitness: usize) -> Self {
        Fig1Spec {
            k,
            parent_fitness,
            trajectories: 20,
            snapshots_per_trajectory: 10,
            snapshot_gap: 2000,
            max_iters_per_trajectory: 200_000,
            pair_count: 2000,
            bins: 20,
            base_seed: 0,
        }
    }
}

/// A crossed parent pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairObservation {
    pub distance: usize,
    pub child_fitness: usize,
    /// Whether both parents came from the same trajectory.
    pub same_trajectory: bool,
}

/// Colorings of a given fitness, tagged with the trajectory they came from.
pub fn build_parent_pool(g: &Graph, spec: &Fig1Spec) -> Vec<(usize, Coloring)> {
    let mut pool = Vec::new();
    for trajectory in 0..spec.trajectories {
        let seed = spec.base_seed + trajectory as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = random_coloring_with(g.vertex_count(), spec.k, &mut rng);
        let params = TabuColParams::with_iters(spec.max_iters_per_trajectory).seed(seed);
        let mut search = TabuSearch::new(g, start, &params);
        let mut taken = 0;
        let mut last_snapshot: Option<u64> = None;
        let mut t = 0u64;
        while t < spec.max_iters_per_trajectory
            && taken < spec.snapshots_per_trajectory
            && search.fitness() > 0
        {
            let Some(mv) = search.select_move(t) else {
                break;
            };
            search.apply_move(mv.vertex, mv.color, t);
            t += 1;
            let spaced = last_snapshot.is_none_or(|s| t - s >= spec.snapshot_gap);
            if search.fitness() == spec.parent_fitness && spaced {
                pool.push((trajectory, search.coloring().clone()));
                last_snapshot = Some(t);
                taken += 1;
            }
        }
    }
    pool
}

/// Crosses pairs of equal-fitness parents and bins child fitness by the
/// partition distance between the parents.
pub fn experiment_fig1(
    g: &Graph,
    spec: &Fig1Spec,
) -> Result<(ExperimentCurve, Vec<PairObservation>), HarnessError> {
    let pool = build_parent_pool(g, spec);
    if pool.len() < 2 {
        return Err(HarnessError::PoolTimeout {
            target: spec.parent_fitness,
            found: pool.len(),
        });
    }
    let mut pairs: Vec<(usize, usize)> = (0..pool.len())
        .flat_map(|i| ((i + 1)..pool.len()).map(move |j| (i, j)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.base_seed ^ 0xF1_61);
    if pairs.len() > spec.pair_count {
        pairs.shuffle(&mut rng);
        pairs.truncate(spec.pair_count);
        pairs.sort_unstable();
    }

    let observations: Vec<PairObservation> = pairs
        .iter()
        .enumerate()
        .map(|(idx, &(i, j))| {
            let (ti, a) = &pool[i];
            let (tj, b) = &pool[j];
            let child = gpx(a, b, spec.base_seed.wrapping_add(idx as u64)).expect("same k");
            PairObservation {
                distance: partition_distance(a, b).expect("same n"),
                child_fitness: conflicts(g, &child),
                same_trajectory: ti == tj,
            }
        })
        .collect();

    Ok((bin_observations(&observations, spec.bins), observations))
}

/// Equal-width distance bins between the smallest and largest observed
/// distance; `x` is the mean distance inside each nonempty bin.
pub fn bin_observations(observations: &[PairObservation], bins: usize) -> ExperimentCurve {
    let bins = bins.max(1);
    let lo = observations.iter().map(|o| o.distance).min().unwrap_or(0) as f64;
    let hi = observations.iter().map(|o| o.distance).max().unwrap_or(0) as f64;
    let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
    let mut buckets: Vec<Vec<&PairObservation>> = vec![Vec::new(); bins];
    for o in observations {
        let idx = (((o.distance as f64 - lo) / width) as usize).min(bins - 1);
        buckets[idx].push(o);
    }
    let points = buckets
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| {
            let x = mean(&b.iter().map(|o| o.distance as f64).collect::<Vec<_>>()).unwrap();
            let ys: Vec<f64> = b.iter().map(|o| o.child_fitness as f64).collect();
            CurvePoint::from_values(x, &ys, 0)
        })
        .collect();
    ExperimentCurve {
        name: "fig1".into(),
        points,
        runs: Vec::new(),
        cap: None,
    }
}
