//! Benchmark rows on the DIMACS graphs. Ignored by default: they need the
//! instance files (see `scripts/fetch_instances.sh`) and take hours.
//!
//! ```text
//! H2COL_INSTANCES=/path/to/graphs cargo test --release -p h2col --test dimacs_rows -- --ignored
//! ```

use std::path::PathBuf;

use h2col::harness::run_batch;
use h2col::{Graph, H2OConfig};

fn load(name: &str) -> Graph {
    let dir = std::env::var_os("H2COL_INSTANCES")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances"));
    let path = dir.join(format!("{name}.col"));
    Graph::load_dimacs(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Runs 20 seeds and checks the success count and the mean generations of
/// successful runs against the published row.
fn check_row(
    name: &str,
    k: usize,
    iter_tc: u64,
    elites: bool,
    min_success: usize,
    gene: f64,
    factor: f64,
) {
    let g = load(name);
    let cfg = H2OConfig {
        use_elites: elites,
        max_seconds: Some(3600.0),
        ..H2OConfig::new(k, iter_tc)
    };
    let batch = run_batch(&g, &cfg, 20, 1, true).unwrap();
    let s = &batch.stats;
    assert!(
        s.success_count >= min_success,
        "{name} k={k}: {}",
        s.success_label()
    );
    let mean = s.mean_generations.unwrap();
    assert!(
        mean >= gene / factor && mean <= gene * factor,
        "{name} k={k}: mean generations {mean:.0}, published {gene}"
    );
}

#[test]
#[ignore = "needs DSJC500.1.col and about an hour"]
fn dsjc500_1_without_elites() {
    check_row("DSJC500.1", 12, 8000, false, 8, 158.0, 3.0);
}

#[test]
#[ignore = "needs DSJC500.5.col and several hours"]
fn dsjc500_5_k48() {
    check_row("DSJC500.5", 48, 8000, true, 18, 494.0, 2.0);
}

#[test]
#[ignore = "needs DSJC1000.1.col and several hours"]
fn dsjc1000_1_k20() {
    check_row("DSJC1000.1", 20, 3000, true, 18, 346.0, 2.0);
}

#[test]
#[ignore = "needs flat1000_50_0.col and several hours"]
fn flat1000_50_k50() {
    check_row("flat1000_50_0", 50, 130_000, true, 18, 5.0, 4.0);
}

#[test]
#[ignore = "needs DSJC500.1.col and about an hour"]
fn dsjc500_1_k12() {
    check_row("DSJC500.1", 12, 4000, true, 18, 483.0, 2.0);
}
