//! The two-trajectory memetic loop.
//!
//! Each generation crosses the two parents both ways, improves both
//! children with TabuCol, records the best, and lets the children replace
//! the parents. With elites enabled, `elite1` keeps the best child of the
//! current cycle; every `iter_cycle` generations the previous cycle's best
//! (`elite2`) is injected as the first parent and the cycle restarts.
//!
//! Every random decision draws from a stream derived from
//! `(seed, generation, child)`, so the two child pipelines can run on
//! separate threads and still reproduce the sequential trace exactly.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::coloring::{conflicts, random_coloring_with, Coloring};
use crate::gpx::{crossover, CrossoverError, CrossoverKind};
use crate::graph::Graph;
use crate::tabucol::{tabucol_observed, StepRecord, TabuColOutcome, TabuColParams};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("k must be at least 1")]
    NoColors,
    #[error("iter_cycle must be at least 1")]
    ZeroCycle,
    #[error("replacement probability {0} outside [0, 1]")]
    ReplacementProbability(f64),
    #[error("threads must be 1 or 2, got {0}")]
    Threads(usize),
    #[error(transparent)]
    Crossover(#[from] CrossoverError),
}

/// What `elite1` becomes when a cycle ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EliteReset {
    /// An empty slot that any child replaces.
    #[default]
    Unset,
    /// A fresh random coloring, as in the literal algorithm.
    Random,
}

/// Parameters of one engine run.
#[derive(Debug, Clone, PartialEq)]
pub struct H2OConfig {
    pub k: usize,
    /// TabuCol iterations per child per generation.
    pub iter_tc: u64,
    /// Generations per elite cycle.
    pub iter_cycle: u64,
    pub use_elites: bool,
    /// Chance that a child no better than its parent still replaces it.
    pub replacement_probability: f64,
    pub crossover: CrossoverKind,
    pub elite_reset: EliteReset,
    pub max_generations: Option<u64>,
    pub max_seconds: Option<f64>,
    /// Stop once the cumulative TabuCol iterations reach this cap.
    pub max_ls_iterations: Option<u64>,
    /// 1 runs the two child searches in sequence, 2 in parallel.
    pub threads: usize,
    pub tenure_span: u32,
    pub tenure_alpha: f64,
    pub seed: u64,
}

impl H2OConfig {
    pub fn new(k: usize, iter_tc: u64) -> Self {
        let tabu = TabuColParams::default();
        H2OConfig {
            k,
            iter_tc,
            iter_cycle: 10,
            use_elites: true,
            replacement_probability: 1.0,
            crossover: CrossoverKind::Standard,
            elite_reset: EliteReset::Unset,
            max_generations: None,
            max_seconds: None,
            max_ls_iterations: None,
            threads: 2,
            tenure_span: tabu.tenure_span,
            tenure_alpha: tabu.tenure_alpha,
            seed: 0,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn max_generations(mut self, generations: u64) -> Self {
        self.max_generations = Some(generations);
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.k == 0 {
            return Err(EngineError::NoColors);
        }
        if self.iter_cycle == 0 {
            return Err(EngineError::ZeroCycle);
        }
        if !(0.0..=1.0).contains(&self.replacement_probability) {
            return Err(EngineError::ReplacementProbability(
                self.replacement_probability,
            ));
        }
        if !(1..=2).contains(&self.threads) {
            return Err(EngineError::Threads(self.threads));
        }
        self.crossover.validate(self.k)?;
        Ok(())
    }
}

/// A coloring with its cached fitness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scored {
    pub coloring: Coloring,
    pub fitness: usize,
}

impl Scored {
    pub fn evaluate(g: &Graph, coloring: Coloring) -> Scored {
        let fitness = conflicts(g, &coloring);
        Scored { coloring, fitness }
    }
}

impl From<TabuColOutcome> for Scored {
    fn from(out: TabuColOutcome) -> Self {
        Scored {
            coloring: out.best,
            fitness: out.best_fitness,
        }
    }
}

/// Per-generation summary, in the order the trace CSV writes it.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: u64,
    pub fitness_c1: usize,
    pub fitness_c2: usize,
    pub iters_c1: u64,
    pub iters_c2: u64,
    /// `None` without elites.
    pub elite1_fitness: Option<usize>,
    pub best_fitness: usize,
    pub cumulative_iterations: u64,
    pub elapsed: Duration,
}

impl GenerationRecord {
    pub fn csv_header(with_elapsed: bool) -> &'static str {
        if with_elapsed {
            "generation,fitness_c1,fitness_c2,fitness_elite1,best_fitness,iterations,elapsed"
        } else {
            "generation,fitness_c1,fitness_c2,fitness_elite1,best_fitness,iterations"
        }
    }

    /// One CSV line without the newline. Elapsed time is the only
    /// non-reproducible column, so it is optional.
    pub fn csv_row(&self, with_elapsed: bool) -> String {
        let mut row = format!(
            "{},{},{},{},{},{}",
            self.generation,
            self.fitness_c1,
            self.fitness_c2,
            self.elite1_fitness
                .map(|f| f.to_string())
                .unwrap_or_default(),
            self.best_fitness,
            self.cumulative_iterations
        );
        if with_elapsed {
            write!(row, ",{:.6}", self.elapsed.as_secs_f64()).unwrap();
        }
        row
    }
}

/// Hooks into a running engine. Both methods default to no-ops.
pub trait EngineObserver {
    fn on_generation(&mut self, _record: &GenerationRecord) {}

    /// Called for every TabuCol move when [`EngineObserver::wants_ls_steps`]
    /// is true; `child` is 0 or 1.
    fn on_ls_step(&mut self, _generation: u64, _child: usize, _step: &StepRecord) {}

    fn wants_ls_steps(&self) -> bool {
        false
    }
}

impl EngineObserver for () {}

/// Collects generation records.
impl EngineObserver for Vec<GenerationRecord> {
    fn on_generation(&mut self, record: &GenerationRecord) {
        self.push(record.clone());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Found,
    Generations,
    Seconds,
    Iterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineResult {
    pub found: bool,
    pub best: Coloring,
    pub best_fitness: usize,
    pub generations: u64,
    pub total_ls_iterations: u64,
    pub elapsed: Duration,
    pub stop: StopReason,
}

/// Mixes a base seed with a path of indices (SplitMix64 finalizer per
/// component) into an independent stream seed.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

const INIT_STREAM: u64 = u64::MAX;
const REPLACE_STREAM: u64 = 2;
const ELITE_STREAM: u64 = 3;

/// Decides whether a child replaces its parent: always when strictly
/// better, otherwise with probability `x`.
pub fn replaces<R: Rng + ?Sized>(child: usize, parent: usize, x: f64, rng: &mut R) -> bool {
    if child < parent || x >= 1.0 {
        true
    } else if x <= 0.0 {
        false
    } else {
        rng.gen_bool(x)
    }
}

/// Index-preserving parent update: child `i` may replace parent `i`.
pub fn update_parents<R: Rng + ?Sized>(
    children: [Scored; 2],
    parents: [Scored; 2],
    x: f64,
    rng: &mut R,
) -> [Scored; 2] {
    let [c1, c2] = children;
    let [p1, p2] = parents;
    let first = if replaces(c1.fitness, p1.fitness, x, rng) {
        c1
    } else {
        p1
    };
    let second = if replaces(c2.fitness, p2.fitness, x, rng) {
        c2
    } else {
        p2
    };
    [first, second]
}

struct ChildRun {
    scored: Scored,
    iters: u64,
    steps: Vec<StepRecord>,
}

fn child_pipeline(
    g: &Graph,
    cfg: &H2OConfig,
    generation: u64,
    child: usize,
    first: &Coloring,
    second: &Coloring,
    record_steps: bool,
) -> ChildRun {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[generation, child as u64, 0]));
    let offspring =
        crossover(first, second, cfg.crossover, &mut rng).expect("crossover validated with config");
    let params = TabuColParams {
        max_iters: cfg.iter_tc,
        tenure_span: cfg.tenure_span,
        tenure_alpha: cfg.tenure_alpha,
        span_inclusive: true,
        seed: derive_seed(cfg.seed, &[generation, child as u64, 1]),
    };
    let mut steps = Vec::new();
    let outcome = tabucol_observed(g, &offspring, &params, |s| {
        if record_steps {
            steps.push(*s);
        }
    });
    ChildRun {
        iters: outcome.iters_used,
        scored: outcome.into(),
        steps,
    }
}

/// Runs H'₂col: no elites, children always (or probabilistically) replace
/// the parents.
pub fn run_h2prime(g: &Graph, cfg: &H2OConfig) -> Result<EngineResult, EngineError> {
    let cfg = H2OConfig {
        use_elites: false,
        ..cfg.clone()
    };
    run(g, &cfg, &mut ())
}

/// Runs H₂col: the loop with two elites and cycle-based reinjection.
pub fn run_h2col(g: &Graph, cfg: &H2OConfig) -> Result<EngineResult, EngineError> {
    let cfg = H2OConfig {
        use_elites: true,
        ..cfg.clone()
    };
    run(g, &cfg, &mut ())
}

/// Runs the engine as configured (`cfg.use_elites` selects the variant),
/// reporting to `observer`.
pub fn run<O: EngineObserver + ?Sized>(
    g: &Graph,
    cfg: &H2OConfig,
    observer: &mut O,
) -> Result<EngineResult, EngineError> {
    cfg.validate()?;
    let start = Instant::now();
    let n = g.vertex_count();
    let k = cfg.k;

    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[INIT_STREAM]));
    let mut parents = [
        Scored::evaluate(g, random_coloring_with(n, k, &mut init_rng)),
        Scored::evaluate(g, random_coloring_with(n, k, &mut init_rng)),
    ];
    let mut elite2 = Scored::evaluate(g, random_coloring_with(n, k, &mut init_rng));
    let mut elite1: Option<Scored> = None;
    let mut best = if parents[1].fitness < parents[0].fitness {
        parents[1].clone()
    } else {
        parents[0].clone()
    };

    let mut generation = 0u64;
    let mut total_iters = 0u64;
    let record_steps = observer.wants_ls_steps();

    let stop = loop {
        if best.fitness == 0 {
            break StopReason::Found;
        }
        if cfg.max_generations.is_some_and(|m| generation >= m) {
            break StopReason::Generations;
        }
        if cfg.max_ls_iterations.is_some_and(|m| total_iters >= m) {
            break StopReason::Iterations;
        }
        if cfg
            .max_seconds
            .is_some_and(|s| start.elapsed().as_secs_f64() >= s)
        {
            break StopReason::Seconds;
        }

        let (p1, p2) = (&parents[0].coloring, &parents[1].coloring);
        let (run1, run2) = if cfg.threads >= 2 {
            std::thread::scope(|scope| {
                let second =
                    scope.spawn(|| child_pipeline(g, cfg, generation, 1, p2, p1, record_steps));
                let first = child_pipeline(g, cfg, generation, 0, p1, p2, record_steps);
                (first, second.join().expect("child search panicked"))
            })
        } else {
            (
                child_pipeline(g, cfg, generation, 0, p1, p2, record_steps),
                child_pipeline(g, cfg, generation, 1, p2, p1, record_steps),
            )
        };
        if record_steps {
            for (child, run) in [&run1, &run2].into_iter().enumerate() {
                for step in &run.steps {
                    observer.on_ls_step(generation, child, step);
                }
            }
        }
        total_iters += run1.iters + run2.iters;
        let (c1, c2) = (run1.scored, run2.scored);

        if cfg.use_elites {
            let candidate = if c2.fitness < c1.fitness { &c2 } else { &c1 };
            if elite1
                .as_ref()
                .is_none_or(|e| candidate.fitness < e.fitness)
            {
                elite1 = Some(candidate.clone());
            }
        }
        for child in [&c1, &c2] {
            if child.fitness < best.fitness {
                best = child.clone();
            }
        }

        let (fitness_c1, fitness_c2) = (c1.fitness, c2.fitness);
        let mut replace_rng =
            ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[generation, REPLACE_STREAM]));
        let old = parents;
        parents = update_parents([c1, c2], old, cfg.replacement_probability, &mut replace_rng);

        observer.on_generation(&GenerationRecord {
            generation,
            fitness_c1,
            fitness_c2,
            iters_c1: run1.iters,
            iters_c2: run2.iters,
            elite1_fitness: elite1.as_ref().map(|e| e.fitness),
            best_fitness: best.fitness,
            cumulative_iterations: total_iters,
            elapsed: start.elapsed(),
        });

        if cfg.use_elites && generation.is_multiple_of(cfg.iter_cycle) {
            let finished = elite1.take().expect("elite1 is set after every generation");
            parents[0] = std::mem::replace(&mut elite2, finished);
            if cfg.elite_reset == EliteReset::Random {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[generation, ELITE_STREAM]));
                elite1 = Some(Scored::evaluate(g, random_coloring_with(n, k, &mut rng)));
            }
        }
        generation += 1;
    };

    Ok(EngineResult {
        found: best.fitness == 0,
        best_fitness: best.fitness,
        best: best.coloring,
        generations: generation,
        total_ls_iterations: total_iters,
        elapsed: start.elapsed(),
        stop,
    })
}
