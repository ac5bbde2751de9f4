//! k-coloring by a two-individual memetic algorithm.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: undirected graphs and DIMACS `.col` files.
//! - [`coloring`]: complete k-colorings, conflict counts, partition distance.
//! - [`tabucol`]: tabu search over critic 1-moves with incremental deltas.
//! - [`gpx`]: greedy partition crossover and two diversification variants.
//! - [`engine`]: the two-trajectory loop (with and without elites).
//! - [`harness`]: repeated runs, statistics, and the diversification sweeps.
//!
//! ```
//! use h2col::{engine::{run_h2col, H2OConfig}, graph::petersen_graph, coloring::is_legal};
//!
//! let g = petersen_graph();
//! let result = run_h2col(&g, &H2OConfig::new(3, 1000).seed(7).max_generations(50)).unwrap();
//! assert!(result.found);
//! assert!(is_legal(&g, &result.best));
//! ```

pub mod assignment;
pub mod coloring;
pub mod engine;
pub mod gpx;
pub mod graph;
pub mod harness;
pub mod tabucol;

pub use coloring::{fitness, is_legal, partition_distance, random_coloring, Coloring};
pub use engine::{run_h2col, run_h2prime, EngineResult, H2OConfig};
pub use gpx::{gpx, gpx_imbalanced, gpx_randomized, CrossoverKind};
pub use graph::{parse_dimacs, random_graph, Graph};
pub use tabucol::{tabucol, TabuColParams};
