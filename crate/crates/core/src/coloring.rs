//! Complete k-colorings, the conflict-count fitness and the partition
//! distance between two colorings.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::assignment::max_weight_assignment;
use crate::graph::{Graph, Vertex};

pub type Color = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ColoringError {
    #[error("coloring has {coloring} vertices but the graph has {graph}")]
    VertexCountMismatch { graph: usize, coloring: usize },
    #[error("colorings have different vertex counts ({0} and {1})")]
    DimensionMismatch(usize, usize),
    #[error("colorings have different color counts ({0} and {1})")]
    ColorCountMismatch(usize, usize),
    #[error("vertex {vertex} has color {color}, outside 0..{k}")]
    ColorOutOfRange {
        vertex: Vertex,
        color: Color,
        k: usize,
    },
}

/// A complete assignment of one of `k` colors to every vertex.
///
/// Completeness is structural; legality (no monochromatic edge) is not an
/// invariant and is checked with [`is_legal`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    colors: Vec<Color>,
    k: usize,
}

impl Coloring {
    pub fn new(colors: Vec<Color>, k: usize) -> Result<Coloring, ColoringError> {
        if let Some((vertex, &color)) = colors.iter().enumerate().find(|(_, &c)| c >= k) {
            return Err(ColoringError::ColorOutOfRange { vertex, color, k });
        }
        Ok(Coloring { colors, k })
    }

    /// Every vertex gets color 0.
    pub fn uniform(n: usize, k: usize) -> Coloring {
        assert!(k >= 1);
        Coloring {
            colors: vec![0; n],
            k,
        }
    }

    /// Builds a coloring from color classes; class `i` becomes color `i`.
    ///
    /// # Panics
    ///
    /// Panics if the classes do not partition `0..n`.
    pub fn from_classes(classes: &[Vec<Vertex>], n: usize) -> Coloring {
        let mut colors = vec![usize::MAX; n];
        for (color, class) in classes.iter().enumerate() {
            for &v in class {
                assert_eq!(colors[v], usize::MAX, "vertex {v} in two classes");
                colors[v] = color;
            }
        }
        assert!(
            colors.iter().all(|&c| c != usize::MAX),
            "classes do not cover every vertex"
        );
        Coloring {
            colors,
            k: classes.len().max(1),
        }
    }

    #[inline]
    pub fn color(&self, v: Vertex) -> Color {
        self.colors[v]
    }

    /// Recolors `v`. Panics if `color >= k`.
    #[inline]
    pub fn set(&mut self, v: Vertex, color: Color) {
        assert!(color < self.k);
        self.colors[v] = color;
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn as_slice(&self) -> &[Color] {
        &self.colors
    }

    /// The `k` color classes, each sorted by vertex id. Some may be empty.
    pub fn classes(&self) -> Vec<Vec<Vertex>> {
        let mut classes = vec![Vec::new(); self.k];
        for (v, &c) in self.colors.iter().enumerate() {
            classes[c].push(v);
        }
        classes
    }

    /// The partition induced by the coloring, independent of color labels:
    /// nonempty classes sorted by their smallest vertex.
    pub fn partition(&self) -> Vec<Vec<Vertex>> {
        let mut classes: Vec<_> = self
            .classes()
            .into_iter()
            .filter(|c| !c.is_empty())
            .collect();
        classes.sort_unstable();
        classes
    }

    /// Applies `permutation[c]` to every color.
    pub fn relabeled(&self, permutation: &[Color]) -> Coloring {
        assert_eq!(permutation.len(), self.k);
        Coloring {
            colors: self.colors.iter().map(|&c| permutation[c]).collect(),
            k: self.k,
        }
    }

    /// Serializes as an `s k <k> fitness <f>` header followed by one
    /// `v <vertex> <color>` line per vertex, both 1-based.
    pub fn to_solution_text(&self, fitness: usize) -> String {
        let mut out = String::with_capacity(self.colors.len() * 10);
        writeln!(out, "s k {} fitness {}", self.k, fitness).unwrap();
        for (v, &c) in self.colors.iter().enumerate() {
            writeln!(out, "v {} {}", v + 1, c + 1).unwrap();
        }
        out
    }
}

/// Problems found while reading a solution file.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolutionFileError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing `s k <k> fitness <f>` header")]
    MissingHeader,
    #[error("no color given for vertices {}", format_ids(.0))]
    MissingVertices(Vec<Vertex>),
}

fn format_ids(ids: &[Vertex]) -> String {
    ids.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Reads a solution file written by [`Coloring::to_solution_text`] for a
/// graph with `n` vertices. Missing vertices are reported 1-based.
pub fn parse_solution(text: &str, n: usize) -> Result<Coloring, SolutionFileError> {
    let err = |line: usize, message: String| SolutionFileError::Parse { line, message };
    let mut k = None;
    let mut colors = vec![None; n];

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["c", ..] => {}
            ["s", "k", count, rest @ ..] => {
                if k.is_some() {
                    return Err(err(line, "duplicate header".into()));
                }
                let count: usize = count
                    .parse()
                    .map_err(|_| err(line, format!("bad color count `{count}`")))?;
                if count == 0 {
                    return Err(err(line, "color count must be positive".into()));
                }
                if !matches!(rest, [] | ["fitness", _]) {
                    return Err(err(line, "malformed header".into()));
                }
                k = Some(count);
            }
            ["v", vertex, color] => {
                let k = k.ok_or_else(|| err(line, "vertex line before header".into()))?;
                let vertex: usize = vertex
                    .parse()
                    .map_err(|_| err(line, format!("bad vertex id `{vertex}`")))?;
                let color: usize = color
                    .parse()
                    .map_err(|_| err(line, format!("bad color `{color}`")))?;
                if vertex == 0 || vertex > n {
                    return Err(err(line, format!("vertex {vertex} out of range 1..={n}")));
                }
                if color == 0 || color > k {
                    return Err(err(line, format!("color {color} out of range 1..={k}")));
                }
                if colors[vertex - 1].replace(color - 1).is_some() {
                    return Err(err(line, format!("vertex {vertex} colored twice")));
                }
            }
            _ => return Err(err(line, format!("unrecognized line `{}`", raw.trim()))),
        }
    }

    let k = k.ok_or(SolutionFileError::MissingHeader)?;
    let missing: Vec<Vertex> = colors
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_none())
        .map(|(v, _)| v + 1)
        .collect();
    if !missing.is_empty() {
        return Err(SolutionFileError::MissingVertices(missing));
    }
    Ok(Coloring {
        colors: colors.into_iter().map(Option::unwrap).collect(),
        k,
    })
}

/// Uniform independent colors in `0..k`.
pub fn random_coloring(g: &Graph, k: usize, seed: u64) -> Coloring {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_coloring_with(g.vertex_count(), k, &mut rng)
}

pub fn random_coloring_with<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Coloring {
    assert!(k >= 1, "k must be at least 1");
    Coloring {
        colors: (0..n).map(|_| rng.gen_range(0..k)).collect(),
        k,
    }
}

fn check_size(g: &Graph, c: &Coloring) -> Result<(), ColoringError> {
    if g.vertex_count() != c.len() {
        return Err(ColoringError::VertexCountMismatch {
            graph: g.vertex_count(),
            coloring: c.len(),
        });
    }
    Ok(())
}

/// Number of monochromatic edges.
pub fn fitness(g: &Graph, c: &Coloring) -> Result<usize, ColoringError> {
    check_size(g, c)?;
    Ok(conflicts(g, c))
}

/// [`fitness`] without the size check.
pub(crate) fn conflicts(g: &Graph, c: &Coloring) -> usize {
    g.edges().filter(|&(u, v)| c.color(u) == c.color(v)).count()
}

pub fn is_legal(g: &Graph, c: &Coloring) -> bool {
    c.len() == g.vertex_count() && conflicts(g, c) == 0
}

/// Conflict bookkeeping recomputed from scratch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictState {
    pub conflict_count: usize,
    /// Sorted ids of vertices incident to at least one conflicting edge.
    pub conflicting_vertices: Vec<Vertex>,
}

impl ConflictState {
    pub fn compute(g: &Graph, c: &Coloring) -> Result<ConflictState, ColoringError> {
        check_size(g, c)?;
        let mut flagged = vec![false; g.vertex_count()];
        let mut conflict_count = 0;
        for (u, v) in g.edges() {
            if c.color(u) == c.color(v) {
                conflict_count += 1;
                flagged[u] = true;
                flagged[v] = true;
            }
        }
        Ok(ConflictState {
            conflict_count,
            conflicting_vertices: (0..flagged.len()).filter(|&v| flagged[v]).collect(),
        })
    }
}

/// Minimum number of single-vertex recolorings turning `a` into `b`, up to
/// a relabeling of colors.
///
/// Solved exactly as `n - W`, where `W` is the maximum-weight matching
/// between the color classes of the two colorings with weights
/// `|class_i(a) ∩ class_j(b)|`. Colorings with different `k` are padded with
/// empty classes.
pub fn partition_distance(a: &Coloring, b: &Coloring) -> Result<usize, ColoringError> {
    if a.len() != b.len() {
        return Err(ColoringError::DimensionMismatch(a.len(), b.len()));
    }
    let size = a.k().max(b.k());
    let mut overlap = vec![0i64; size * size];
    for (&ca, &cb) in a.as_slice().iter().zip(b.as_slice()) {
        overlap[ca * size + cb] += 1;
    }
    let (matched, _) = max_weight_assignment(&overlap, size);
    Ok(a.len() - matched as usize)
}
