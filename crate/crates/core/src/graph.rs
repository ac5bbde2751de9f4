//! Undirected simple graphs and DIMACS `.col` ingestion.
//!
//! Vertex ids are dense and 0-based. Every file format handled here is
//! 1-based, so ids are shifted on the way in and on the way out.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Above this vertex count the dense adjacency matrix is not built.
pub const DENSE_MATRIX_LIMIT: usize = 4096;

pub type Vertex = usize;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing `p edge <n> <m>` line")]
    MissingProblemLine,
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl GraphError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        GraphError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// An immutable undirected simple graph.
///
/// Neighbor lists are stored contiguously (CSR layout) and sorted.
#[derive(Clone)]
pub struct Graph {
    name: String,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    edge_count: usize,
    matrix: Option<Vec<u64>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("name", &self.name)
            .field("n", &self.vertex_count())
            .field("edge_count", &self.edge_count)
            .finish()
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.offsets == other.offsets && self.neighbors == other.neighbors
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph from an edge list over `n` vertices.
    ///
    /// Duplicate and reversed edges collapse to one undirected edge.
    ///
    /// # Panics
    ///
    /// Panics on a self-loop or an endpoint `>= n`.
    pub fn from_edges<I>(name: impl Into<String>, n: usize, edges: I) -> Graph
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for n={n}");
            assert_ne!(u, v, "self-loop on vertex {u}");
            lists[u].push(v as u32);
            lists[v].push(u as u32);
        }
        Self::from_lists(name.into(), lists)
    }

    fn from_lists(name: String, mut lists: Vec<Vec<u32>>) -> Graph {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        let edge_count = neighbors.len() / 2;

        let matrix = (n <= DENSE_MATRIX_LIMIT).then(|| {
            let words = (n * n).div_ceil(64);
            let mut bits = vec![0u64; words];
            for u in 0..n {
                for &v in &neighbors[offsets[u]..offsets[u + 1]] {
                    let idx = u * n + v as usize;
                    bits[idx / 64] |= 1 << (idx % 64);
                }
            }
            bits
        });

        Graph {
            name,
            offsets,
            neighbors,
            edge_count,
            matrix,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Graph {
        self.name = name.into();
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Edge density `2m / (n (n - 1))`.
    pub fn density(&self) -> f64 {
        let n = self.vertex_count() as f64;
        if n < 2.0 {
            return 0.0;
        }
        2.0 * self.edge_count as f64 / (n * (n - 1.0))
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Constant time when the dense matrix exists, binary search otherwise.
    #[inline]
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        match &self.matrix {
            Some(bits) => {
                let idx = u * self.vertex_count() + v;
                bits[idx / 64] & (1 << (idx % 64)) != 0
            }
            None => self.neighbors(u).binary_search(&(v as u32)).is_ok(),
        }
    }

    pub fn has_dense_matrix(&self) -> bool {
        self.matrix.is_some()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Writes the graph in DIMACS `.col` format with 1-based ids.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        if !self.name.is_empty() {
            out.push_str(&format!("c {}\n", self.name));
        }
        out.push_str(&format!(
            "p edge {} {}\n",
            self.vertex_count(),
            self.edge_count
        ));
        for (u, v) in self.edges() {
            out.push_str(&format!("e {} {}\n", u + 1, v + 1));
        }
        out
    }

    pub fn load_dimacs(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
        let path = path.as_ref();
        let text = fs::read(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(parse_dimacs(&text)?.with_name(name))
    }
}

/// Parses a DIMACS `.col` edge file.
///
/// Accepts `c` comment lines, exactly one `p edge <n> <m>` line and any
/// number of `e <u> <v>` lines. The declared `m` is not checked against the
/// edge lines, since published files routinely list edges twice.
pub fn parse_dimacs(text: &[u8]) -> Result<Graph, GraphError> {
    let text = String::from_utf8_lossy(text);
    let mut lists: Option<Vec<Vec<u32>>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        let mut tokens = line.split_whitespace();
        let Some(tag) = tokens.next() else {
            continue;
        };
        match tag {
            "c" => {}
            "p" => {
                if lists.is_some() {
                    return Err(GraphError::at(line_no, "multiple `p` lines"));
                }
                let format = tokens
                    .next()
                    .ok_or_else(|| GraphError::at(line_no, "truncated `p` line"))?;
                if format != "edge" && format != "col" {
                    return Err(GraphError::at(
                        line_no,
                        format!("unsupported problem format `{format}`"),
                    ));
                }
                let n = parse_int(tokens.next(), line_no)?;
                let _m = parse_int(tokens.next(), line_no)?;
                lists = Some(vec![Vec::new(); n]);
            }
            "e" => {
                let lists = lists
                    .as_mut()
                    .ok_or_else(|| GraphError::at(line_no, "edge before `p` line"))?;
                let u = parse_int(tokens.next(), line_no)?;
                let v = parse_int(tokens.next(), line_no)?;
                let n = lists.len();
                if u == 0 || v == 0 || u > n || v > n {
                    return Err(GraphError::at(line_no, "vertex id out of range"));
                }
                if u == v {
                    return Err(GraphError::at(line_no, format!("self-loop on vertex {u}")));
                }
                lists[u - 1].push((v - 1) as u32);
                lists[v - 1].push((u - 1) as u32);
            }
            other => {
                return Err(GraphError::at(
                    line_no,
                    format!("unknown line type `{other}`"),
                ))
            }
        }
    }

    let lists = lists.ok_or(GraphError::MissingProblemLine)?;
    Ok(Graph::from_lists(String::new(), lists))
}

fn parse_int(token: Option<&str>, line: usize) -> Result<usize, GraphError> {
    let token = token.ok_or_else(|| GraphError::at(line, "missing integer"))?;
    token
        .parse()
        .map_err(|_| GraphError::at(line, format!("`{token}` is not a non-negative integer")))
}

/// Erdős–Rényi `G(n, d)`: every unordered pair is an edge with probability `d`.
///
/// # Panics
///
/// Panics if `n == 0` or `d` is outside `[0, 1]`.
pub fn random_graph(n: usize, d: f64, seed: u64) -> Graph {
    assert!(n >= 1, "random_graph needs at least one vertex");
    assert!((0.0..=1.0).contains(&d), "density {d} outside [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(d) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(format!("G({n},{d})#{seed}"), n, edges)
}

/// The Petersen graph: outer 5-cycle, inner pentagram, five spokes.
pub fn petersen_graph() -> Graph {
    let mut edges = Vec::with_capacity(15);
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::from_edges("petersen", 10, edges)
}

pub fn complete_graph(n: usize) -> Graph {
    let edges = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v)));
    Graph::from_edges(format!("K{n}"), n, edges)
}
