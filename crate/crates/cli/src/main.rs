use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use h2col::engine::{run, EliteReset, EngineObserver, GenerationRecord, H2OConfig};
use h2col::harness::ExperimentConfig;
use h2col::tabucol::StepRecord;
use h2col::{coloring::parse_solution, partition_distance, CrossoverKind, Graph};

/// Exit status for malformed input of any kind.
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "h2col",
    version,
    about = "Hybrid two-trajectory k-coloring solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a legal k-coloring of a DIMACS graph.
    Solve(SolveArgs),
    /// Check a solution file against a graph.
    Validate {
        instance: PathBuf,
        coloring: PathBuf,
    },
    /// Print the partition distance between two solution files.
    Distance {
        instance: PathBuf,
        coloring_a: PathBuf,
        coloring_b: PathBuf,
    },
    /// Run a benchmark config and write runs.csv and stats.csv.
    Bench { config: PathBuf },
    /// Run an experiment config and write its curve CSV.
    Experiment { config: PathBuf },
}

#[derive(clap::Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(short = 'k')]
    k: usize,
    /// TabuCol iterations per child per generation.
    #[arg(long, default_value_t = 10_000)]
    iter_tc: u64,
    /// Generations between elite resets.
    #[arg(long, default_value_t = 10)]
    iter_cycle: u64,
    /// Run the variant without elite solutions.
    #[arg(long)]
    no_elites: bool,
    /// Probability that a worse child replaces its parent.
    #[arg(long, default_value_t = 1.0)]
    replacement_prob: f64,
    /// standard, randomized:<level> or imbalanced:<probability>.
    #[arg(long, default_value = "standard", value_parser = parse_crossover)]
    crossover: CrossoverKind,
    /// Restart the first elite from a random coloring instead of leaving it unset.
    #[arg(long)]
    random_elite_reset: bool,
    #[arg(long)]
    max_generations: Option<u64>,
    #[arg(long)]
    max_seconds: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-generation CSV trace.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Add wall-clock time to the trace (makes it non-reproducible).
    #[arg(long)]
    trace_timing: bool,
    /// Per-move TabuCol CSV trace.
    #[arg(long)]
    ls_trace: Option<PathBuf>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    threads: u8,
    /// Solution file; defaults to `<instance stem>.k<k>.sol`.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_crossover(s: &str) -> Result<CrossoverKind, String> {
    let (name, arg) = match s.split_once(':') {
        Some((name, arg)) => (name, Some(arg)),
        None => (s, None),
    };
    match (name, arg) {
        ("standard", None) => Ok(CrossoverKind::Standard),
        ("randomized", Some(x)) => x
            .parse()
            .map(|level| CrossoverKind::Randomized { level })
            .map_err(|_| format!("bad random level `{x}`")),
        ("imbalanced", Some(x)) => x
            .parse()
            .map(|first_parent_prob| CrossoverKind::Imbalanced { first_parent_prob })
            .map_err(|_| format!("bad probability `{x}`")),
        _ => Err(format!(
            "expected standard, randomized:<x> or imbalanced:<x>, got `{s}`"
        )),
    }
}

struct Traces {
    generations: Option<BufWriter<File>>,
    steps: Option<BufWriter<File>>,
    timing: bool,
    error: Option<std::io::Error>,
}

impl Traces {
    fn keep(&mut self, result: std::io::Result<()>) {
        if let Err(e) = result {
            self.error.get_or_insert(e);
        }
    }
}

impl EngineObserver for Traces {
    fn on_generation(&mut self, record: &GenerationRecord) {
        if let Some(w) = &mut self.generations {
            let r = writeln!(w, "{}", record.csv_row(self.timing));
            self.keep(r);
        }
    }

    fn on_ls_step(&mut self, generation: u64, child: usize, step: &StepRecord) {
        if let Some(w) = &mut self.steps {
            let r = writeln!(
                w,
                "{},{},{},{},{}",
                generation, child, step.iteration, step.fitness, step.best_fitness
            );
            self.keep(r);
        }
    }

    fn wants_ls_steps(&self) -> bool {
        self.steps.is_some()
    }
}

fn create_with_header(path: &Path, header: &str) -> Result<BufWriter<File>, String> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| format!("{}: {e}", path.display()))?);
    writeln!(w, "{header}").map_err(|e| e.to_string())?;
    Ok(w)
}

fn load_graph(path: &Path) -> Result<Graph, String> {
    Graph::load_dimacs(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_solution(path: &Path, n: usize) -> Result<h2col::Coloring, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_solution(&text, n).map_err(|e| format!("{}: {e}", path.display()))
}

fn solve(args: SolveArgs) -> Result<ExitCode, String> {
    let g = load_graph(&args.instance)?;
    let cfg = H2OConfig {
        iter_cycle: args.iter_cycle,
        use_elites: !args.no_elites,
        replacement_probability: args.replacement_prob,
        crossover: args.crossover,
        elite_reset: if args.random_elite_reset {
            EliteReset::Random
        } else {
            EliteReset::Unset
        },
        max_generations: args.max_generations,
        max_seconds: args.max_seconds,
        threads: args.threads as usize,
        seed: args.seed,
        ..H2OConfig::new(args.k, args.iter_tc)
    };
    cfg.validate().map_err(|e| e.to_string())?;

    let mut traces = Traces {
        generations: args
            .trace
            .as_deref()
            .map(|p| create_with_header(p, GenerationRecord::csv_header(args.trace_timing)))
            .transpose()?,
        steps: args
            .ls_trace
            .as_deref()
            .map(|p| create_with_header(p, "generation,child,iteration,fitness,best_fitness"))
            .transpose()?,
        timing: args.trace_timing,
        error: None,
    };
    let result = run(&g, &cfg, &mut traces).map_err(|e| e.to_string())?;
    for w in [&mut traces.generations, &mut traces.steps]
        .into_iter()
        .flatten()
    {
        if let Err(e) = w.flush() {
            traces.error.get_or_insert(e);
        }
    }
    if let Some(e) = traces.error {
        return Err(format!("writing trace: {e}"));
    }

    if !result.found {
        println!("BEST fitness={}", result.best_fitness);
        return Ok(ExitCode::from(1));
    }
    let output = args.output.unwrap_or_else(|| {
        let stem = args
            .instance
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy();
        PathBuf::from(format!("{stem}.k{}.sol", args.k))
    });
    fs::write(&output, result.best.to_solution_text(0))
        .map_err(|e| format!("{}: {e}", output.display()))?;
    println!(
        "FOUND k={} iterations={} generations={} seconds={:.3}",
        args.k,
        result.total_ls_iterations,
        result.generations,
        result.elapsed.as_secs_f64()
    );
    Ok(ExitCode::SUCCESS)
}

fn validate(instance: &Path, coloring: &Path) -> Result<ExitCode, String> {
    let g = load_graph(instance)?;
    let c = load_solution(coloring, g.vertex_count())?;
    let f = h2col::fitness(&g, &c).map_err(|e| e.to_string())?;
    if f == 0 {
        println!("LEGAL fitness=0");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("ILLEGAL fitness={f}");
        Ok(ExitCode::from(1))
    }
}

fn distance(instance: &Path, a: &Path, b: &Path) -> Result<ExitCode, String> {
    let g = load_graph(instance)?;
    let a = load_solution(a, g.vertex_count())?;
    let b = load_solution(b, g.vertex_count())?;
    if a.k() != b.k() {
        return Err(format!("color counts differ: {} vs {}", a.k(), b.k()));
    }
    println!("{}", partition_distance(&a, &b).map_err(|e| e.to_string())?);
    Ok(ExitCode::SUCCESS)
}

fn harness(config: &Path) -> Result<ExitCode, String> {
    let cfg = ExperimentConfig::load(config).map_err(|e| format!("{}: {e}", config.display()))?;
    let summary = cfg.execute().map_err(|e| e.to_string())?;
    print!("{summary}");
    println!("results written to {}", cfg.out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Validate { instance, coloring } => validate(&instance, &coloring),
        Command::Distance {
            instance,
            coloring_a,
            coloring_b,
        } => distance(&instance, &coloring_a, &coloring_b),
        Command::Bench { config } | Command::Experiment { config } => harness(&config),
    };
    result.unwrap_or_else(|message| {
        eprintln!("error: {message}");
        ExitCode::from(USAGE)
    })
}
