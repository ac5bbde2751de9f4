//! Greedy partition crossover (GPX) and its randomized and imbalanced
//! variants.
//!
//! The child is built class by class. At step `i` a parent is chosen
//! (alternating in the standard operator), one of its remaining color
//! classes is copied into child color `i`, and those vertices are withdrawn
//! from both parents. After `k` steps, leftover vertices get uniform random
//! colors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::coloring::{Color, Coloring, ColoringError};
use crate::graph::Vertex;

#[derive(Debug, Error, PartialEq)]
pub enum CrossoverError {
    #[error(transparent)]
    Mismatch(#[from] ColoringError),
    #[error("random level {level} exceeds k = {k}")]
    RandomLevelTooLarge { level: usize, k: usize },
    #[error("first-parent probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
}

/// Which class-selection rule the crossover uses.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CrossoverKind {
    /// Alternate parents, always transmit the largest remaining class.
    #[default]
    Standard,
    /// The first `level` steps transmit a uniformly random nonempty class
    /// of the step's parent; greedy afterwards. Parents still alternate.
    Randomized { level: usize },
    /// Each step picks the first parent with this probability, then
    /// transmits its largest remaining class.
    Imbalanced { first_parent_prob: f64 },
}

impl CrossoverKind {
    pub fn validate(&self, k: usize) -> Result<(), CrossoverError> {
        match *self {
            CrossoverKind::Standard => Ok(()),
            CrossoverKind::Randomized { level } if level > k => {
                Err(CrossoverError::RandomLevelTooLarge { level, k })
            }
            CrossoverKind::Randomized { .. } => Ok(()),
            CrossoverKind::Imbalanced {
                first_parent_prob: p,
            } if !(0.0..=1.0).contains(&p) => Err(CrossoverError::ProbabilityOutOfRange(p)),
            CrossoverKind::Imbalanced { .. } => Ok(()),
        }
    }
}

/// The color classes of one parent, shrinking as vertices are withdrawn.
#[derive(Debug, Clone)]
pub struct PartitionView<'a> {
    coloring: &'a Coloring,
    classes: Vec<Vec<Vertex>>,
    slot: Vec<usize>,
}

impl<'a> PartitionView<'a> {
    pub fn new(coloring: &'a Coloring) -> Self {
        let mut classes = vec![Vec::new(); coloring.k()];
        let mut slot = vec![0; coloring.len()];
        for (v, &c) in coloring.as_slice().iter().enumerate() {
            slot[v] = classes[c].len();
            classes[c].push(v);
        }
        PartitionView {
            coloring,
            classes,
            slot,
        }
    }

    pub fn class(&self, c: Color) -> &[Vertex] {
        &self.classes[c]
    }

    pub fn class_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.classes.iter().map(Vec::len)
    }

    /// Removes `v` from whichever class holds it.
    pub fn withdraw(&mut self, v: Vertex) {
        let class = &mut self.classes[self.coloring.color(v)];
        let at = self.slot[v];
        debug_assert_eq!(class[at], v, "vertex {v} already withdrawn");
        class.swap_remove(at);
        if let Some(&moved) = class.get(at) {
            self.slot[moved] = at;
        }
    }

    /// Index of a largest class, ties broken uniformly at random.
    fn largest_class<R: Rng + ?Sized>(&self, rng: &mut R) -> Color {
        let mut best = 0;
        let mut best_len = 0;
        let mut ties = 0u32;
        for (c, class) in self.classes.iter().enumerate() {
            let len = class.len();
            if len > best_len || ties == 0 {
                best = c;
                best_len = len;
                ties = 1;
            } else if len == best_len {
                ties += 1;
                if rng.gen_range(0..ties) == 0 {
                    best = c;
                }
            }
        }
        best
    }

    /// A uniformly random nonempty class, or a uniformly random class when
    /// all are empty.
    fn random_class<R: Rng + ?Sized>(&self, rng: &mut R) -> Color {
        let nonempty: Vec<Color> = (0..self.classes.len())
            .filter(|&c| !self.classes[c].is_empty())
            .collect();
        if nonempty.is_empty() {
            rng.gen_range(0..self.classes.len())
        } else {
            nonempty[rng.gen_range(0..nonempty.len())]
        }
    }
}

/// Which parent a child class came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassSource {
    /// 0 for the first parent, 1 for the second.
    pub parent: usize,
    pub parent_color: Color,
}

/// The child after the `k` transmission steps, before leftover vertices
/// are placed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialChild {
    pub n: usize,
    pub k: usize,
    /// `classes[i]` is child color `i`, possibly empty.
    pub classes: Vec<Vec<Vertex>>,
    pub sources: Vec<ClassSource>,
    /// Vertices not covered by any transmitted class, ascending.
    pub leftovers: Vec<Vertex>,
}

impl PartialChild {
    /// Gives every leftover vertex an independent uniform color.
    pub fn complete<R: Rng + ?Sized>(&self, rng: &mut R) -> Coloring {
        let mut colors = vec![0; self.n];
        for (color, class) in self.classes.iter().enumerate() {
            for &v in class {
                colors[v] = color;
            }
        }
        for &v in &self.leftovers {
            colors[v] = rng.gen_range(0..self.k);
        }
        Coloring::new(colors, self.k).expect("child colors are below k")
    }
}

fn check_parents(p1: &Coloring, p2: &Coloring) -> Result<(), CrossoverError> {
    if p1.len() != p2.len() {
        return Err(ColoringError::DimensionMismatch(p1.len(), p2.len()).into());
    }
    if p1.k() != p2.k() {
        return Err(ColoringError::ColorCountMismatch(p1.k(), p2.k()).into());
    }
    Ok(())
}

/// Runs the `k` transmission steps. Parents are read, never modified.
pub fn transmit_classes<R: Rng + ?Sized>(
    p1: &Coloring,
    p2: &Coloring,
    kind: CrossoverKind,
    rng: &mut R,
) -> Result<PartialChild, CrossoverError> {
    check_parents(p1, p2)?;
    let k = p1.k();
    let n = p1.len();
    kind.validate(k)?;

    let mut views = [PartitionView::new(p1), PartitionView::new(p2)];
    let mut assigned = vec![false; n];
    let mut classes = Vec::with_capacity(k);
    let mut sources = Vec::with_capacity(k);

    for step in 0..k {
        let parent = match kind {
            CrossoverKind::Standard | CrossoverKind::Randomized { .. } => step % 2,
            CrossoverKind::Imbalanced { first_parent_prob } => {
                if rng.gen_bool(first_parent_prob) {
                    0
                } else {
                    1
                }
            }
        };
        let parent_color = match kind {
            CrossoverKind::Randomized { level } if step < level => views[parent].random_class(rng),
            _ => views[parent].largest_class(rng),
        };
        let mut class = views[parent].class(parent_color).to_vec();
        class.sort_unstable();
        for &v in &class {
            views[0].withdraw(v);
            views[1].withdraw(v);
            assigned[v] = true;
        }
        classes.push(class);
        sources.push(ClassSource {
            parent,
            parent_color,
        });
    }

    let leftovers = (0..n).filter(|&v| !assigned[v]).collect();
    Ok(PartialChild {
        n,
        k,
        classes,
        sources,
        leftovers,
    })
}

/// Crossover with an explicit random source.
pub fn crossover<R: Rng + ?Sized>(
    p1: &Coloring,
    p2: &Coloring,
    kind: CrossoverKind,
    rng: &mut R,
) -> Result<Coloring, CrossoverError> {
    let partial = transmit_classes(p1, p2, kind, rng)?;
    Ok(partial.complete(rng))
}

/// Standard GPX. Asymmetric: `gpx(p1, p2)` and `gpx(p2, p1)` differ in
/// general because the first parent transmits first.
pub fn gpx(p1: &Coloring, p2: &Coloring, seed: u64) -> Result<Coloring, CrossoverError> {
    crossover(
        p1,
        p2,
        CrossoverKind::Standard,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}

/// GPX whose first `level` steps transmit random classes.
pub fn gpx_randomized(
    p1: &Coloring,
    p2: &Coloring,
    level: usize,
    seed: u64,
) -> Result<Coloring, CrossoverError> {
    crossover(
        p1,
        p2,
        CrossoverKind::Randomized { level },
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}

/// GPX where each step draws the first parent with probability `x`.
pub fn gpx_imbalanced(
    p1: &Coloring,
    p2: &Coloring,
    x: f64,
    seed: u64,
) -> Result<Coloring, CrossoverError> {
    crossover(
        p1,
        p2,
        CrossoverKind::Imbalanced {
            first_parent_prob: x,
        },
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}
