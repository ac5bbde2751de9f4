//! TabuCol: tabu search over complete k-colorings.
//!
//! The neighborhood is the set of critic 1-moves (recolor one conflicting
//! vertex). Moves are scored incrementally from a table of neighbor-color
//! counts: `adjacent(v, c)` is the number of neighbors of `v` colored `c`,
//! so recoloring `v` to `c` changes the conflict count by
//! `adjacent(v, c) - adjacent(v, color(v))`. A move only touches the rows
//! of the moved vertex's neighbors, one cell each.
//!
//! The reverse of every applied move is forbidden for a dynamic tenure of
//! `uniform(0..=A) + floor(alpha * conflicting_vertices)` iterations. A tabu
//! move is still admissible when it leads strictly below the best fitness
//! seen so far (aspiration).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coloring::{conflicts, Color, Coloring};
use crate::graph::{Graph, Vertex};

/// Tenure and budget settings for one TabuCol run.
#[derive(Debug, Clone, PartialEq)]
pub struct TabuColParams {
    /// Iteration budget (`Iter_TC`).
    pub max_iters: u64,
    /// Random part of the tenure, `A`.
    pub tenure_span: u32,
    /// Weight of the conflicting-vertex count in the tenure.
    pub tenure_alpha: f64,
    /// Draw the random part from `0..=A` (true) or `0..A` (false).
    pub span_inclusive: bool,
    pub seed: u64,
}

impl Default for TabuColParams {
    fn default() -> Self {
        TabuColParams {
            max_iters: 10_000,
            tenure_span: 10,
            tenure_alpha: 0.6,
            span_inclusive: true,
            seed: 0,
        }
    }
}

impl TabuColParams {
    pub fn with_iters(max_iters: u64) -> Self {
        TabuColParams {
            max_iters,
            ..Self::default()
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// A candidate recoloring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub vertex: Vertex,
    pub color: Color,
    /// Change in the number of conflicting edges.
    pub delta: i32,
}

/// Iteration-stamped tabu list: `(v, c)` is tabu at iteration `t` iff the
/// stored stamp is greater than `t`.
#[derive(Debug, Clone)]
pub struct TabuTable {
    k: usize,
    stamps: Vec<u64>,
}

impl TabuTable {
    pub fn new(n: usize, k: usize) -> Self {
        TabuTable {
            k,
            stamps: vec![0; n * k],
        }
    }

    #[inline]
    pub fn is_tabu(&self, v: Vertex, c: Color, t: u64) -> bool {
        self.stamps[v * self.k + c] > t
    }

    #[inline]
    pub fn stamp(&self, v: Vertex, c: Color) -> u64 {
        self.stamps[v * self.k + c]
    }

    #[inline]
    pub fn forbid_until(&mut self, v: Vertex, c: Color, stamp: u64) {
        self.stamps[v * self.k + c] = stamp;
    }
}

/// A materialized `n × k` matrix of 1-move deltas. The entry of each
/// vertex's current color is 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaTable {
    k: usize,
    entries: Vec<i32>,
}

impl DeltaTable {
    /// Recounts every delta from scratch, edge by edge.
    pub fn recompute(g: &Graph, c: &Coloring) -> DeltaTable {
        let k = c.k();
        let n = g.vertex_count();
        let mut entries = vec![0i32; n * k];
        for v in 0..n {
            let own = c.color(v);
            for col in 0..k {
                if col == own {
                    continue;
                }
                let mut delta = 0;
                for &u in g.neighbors(v) {
                    let cu = c.color(u as usize);
                    if cu == col {
                        delta += 1;
                    } else if cu == own {
                        delta -= 1;
                    }
                }
                entries[v * k + col] = delta;
            }
        }
        DeltaTable { k, entries }
    }

    #[inline]
    pub fn get(&self, v: Vertex, c: Color) -> i32 {
        self.entries[v * self.k + c]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vertex_count(&self) -> usize {
        self.entries.len().checked_div(self.k).unwrap_or(0)
    }
}

/// Unordered set of vertex ids with O(1) insert, remove and membership.
#[derive(Debug, Clone)]
struct VertexSet {
    members: Vec<u32>,
    slot: Vec<u32>,
}

impl VertexSet {
    const ABSENT: u32 = u32::MAX;

    fn new(n: usize) -> Self {
        VertexSet {
            members: Vec::new(),
            slot: vec![Self::ABSENT; n],
        }
    }

    #[inline]
    fn contains(&self, v: Vertex) -> bool {
        self.slot[v] != Self::ABSENT
    }

    #[inline]
    fn insert(&mut self, v: Vertex) {
        if !self.contains(v) {
            self.slot[v] = self.members.len() as u32;
            self.members.push(v as u32);
        }
    }

    #[inline]
    fn remove(&mut self, v: Vertex) {
        let at = self.slot[v];
        if at == Self::ABSENT {
            return;
        }
        let last = self.members.pop().unwrap();
        if last as usize != v {
            self.members[at as usize] = last;
            self.slot[last as usize] = at;
        }
        self.slot[v] = Self::ABSENT;
    }

    fn len(&self) -> usize {
        self.members.len()
    }
}

/// The mutable state of a TabuCol search over one graph.
#[derive(Debug, Clone)]
pub struct TabuSearch<'g> {
    graph: &'g Graph,
    coloring: Coloring,
    k: usize,
    adjacent: Vec<i32>,
    tabu: TabuTable,
    conflicting: VertexSet,
    conflict_count: usize,
    best_fitness: usize,
    tenure_span: u32,
    tenure_alpha: f64,
    span_inclusive: bool,
    rng: ChaCha8Rng,
}

impl<'g> TabuSearch<'g> {
    /// # Panics
    ///
    /// Panics if `start` does not cover exactly the vertices of `graph`.
    pub fn new(graph: &'g Graph, start: Coloring, params: &TabuColParams) -> Self {
        assert_eq!(
            graph.vertex_count(),
            start.len(),
            "coloring does not match the graph"
        );
        let n = graph.vertex_count();
        let k = start.k();
        let mut adjacent = vec![0i32; n * k];
        for v in 0..n {
            for &u in graph.neighbors(v) {
                adjacent[v * k + start.color(u as usize)] += 1;
            }
        }
        let mut conflicting = VertexSet::new(n);
        let mut twice_conflicts = 0usize;
        for v in 0..n {
            let own = adjacent[v * k + start.color(v)];
            if own > 0 {
                conflicting.insert(v);
                twice_conflicts += own as usize;
            }
        }
        let conflict_count = twice_conflicts / 2;
        TabuSearch {
            graph,
            coloring: start,
            k,
            adjacent,
            tabu: TabuTable::new(n, k),
            conflicting,
            conflict_count,
            best_fitness: conflict_count,
            tenure_span: params.tenure_span,
            tenure_alpha: params.tenure_alpha,
            span_inclusive: params.span_inclusive,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    pub fn into_coloring(self) -> Coloring {
        self.coloring
    }

    /// Current number of conflicting edges.
    pub fn fitness(&self) -> usize {
        self.conflict_count
    }

    /// Lowest fitness reached since the search started (aspiration level).
    pub fn best_fitness(&self) -> usize {
        self.best_fitness
    }

    pub fn conflicting_count(&self) -> usize {
        self.conflicting.len()
    }

    pub fn conflicting_vertices(&self) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = self
            .conflicting
            .members
            .iter()
            .map(|&v| v as usize)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn is_conflicting(&self, v: Vertex) -> bool {
        self.conflicting.contains(v)
    }

    pub fn tabu_table(&self) -> &TabuTable {
        &self.tabu
    }

    /// Conflict change of recoloring `v` to `c`; 0 for its own color.
    #[inline]
    pub fn delta(&self, v: Vertex, c: Color) -> i32 {
        let row = &self.adjacent[v * self.k..(v + 1) * self.k];
        row[c] - row[self.coloring.color(v)]
    }

    /// The incremental deltas materialized as a table.
    pub fn delta_table(&self) -> DeltaTable {
        let n = self.graph.vertex_count();
        let mut entries = vec![0; n * self.k];
        for v in 0..n {
            for c in 0..self.k {
                entries[v * self.k + c] = self.delta(v, c);
            }
        }
        DeltaTable { k: self.k, entries }
    }

    /// Whether `mv` would be accepted at iteration `t`: not tabu, or tabu
    /// but leading strictly below the best fitness so far.
    #[inline]
    pub fn is_admissible(&self, mv: Move, t: u64) -> bool {
        !self.tabu.is_tabu(mv.vertex, mv.color, t)
            || (self.conflict_count as i64 + mv.delta as i64) < self.best_fitness as i64
    }

    /// Picks the best admissible critic 1-move at iteration `t`, ties
    /// broken uniformly at random. When every move is tabu and none
    /// aspirates, the least-delta move is taken regardless of tabu status.
    /// Returns `None` only when there is no conflicting vertex or `k == 1`.
    pub fn select_move(&mut self, t: u64) -> Option<Move> {
        let k = self.k;
        let aspiration = self.best_fitness as i64 - self.conflict_count as i64;
        let mut best: Option<Move> = None;
        let mut ties = 0u32;
        let mut any_candidate = false;

        for &v in &self.conflicting.members {
            let v = v as usize;
            let row = &self.adjacent[v * k..(v + 1) * k];
            let own_color = self.coloring.color(v);
            let own = row[own_color];
            for (c, &count) in row.iter().enumerate() {
                if c == own_color {
                    continue;
                }
                any_candidate = true;
                let delta = count - own;
                let best_delta = best.map_or(i32::MAX, |m| m.delta);
                if delta > best_delta {
                    continue;
                }
                if self.tabu.is_tabu(v, c, t) && (delta as i64) >= aspiration {
                    continue;
                }
                let mv = Move {
                    vertex: v,
                    color: c,
                    delta,
                };
                if delta < best_delta {
                    best = Some(mv);
                    ties = 1;
                } else {
                    ties += 1;
                    if self.rng.gen_range(0..ties) == 0 {
                        best = Some(mv);
                    }
                }
            }
        }

        if best.is_none() && any_candidate {
            best = self.least_delta_move();
        }
        best
    }

    /// Minimum-delta critic move ignoring tabu status, ties at random.
    fn least_delta_move(&mut self) -> Option<Move> {
        let k = self.k;
        let mut best: Option<Move> = None;
        let mut ties = 0u32;
        for &v in &self.conflicting.members {
            let v = v as usize;
            let own_color = self.coloring.color(v);
            for c in (0..k).filter(|&c| c != own_color) {
                let delta = self.delta(v, c);
                let best_delta = best.map_or(i32::MAX, |m| m.delta);
                if delta > best_delta {
                    continue;
                }
                let mv = Move {
                    vertex: v,
                    color: c,
                    delta,
                };
                if delta < best_delta {
                    best = Some(mv);
                    ties = 1;
                } else {
                    ties += 1;
                    if self.rng.gen_range(0..ties) == 0 {
                        best = Some(mv);
                    }
                }
            }
        }
        best
    }

    /// Current tenure: `uniform(0..=A) + floor(alpha * |conflicting|)`.
    pub fn tenure(&mut self) -> u64 {
        let random = match (self.tenure_span, self.span_inclusive) {
            (0, _) => 0,
            (span, true) => self.rng.gen_range(0..=span),
            (span, false) => self.rng.gen_range(0..span),
        };
        random as u64 + (self.tenure_alpha * self.conflicting.len() as f64).floor() as u64
    }

    /// Recolors `v` to `c` at iteration `t` and forbids moving `v` back to
    /// its old color during iterations `t + 1 ..= t + tenure`. Returns the
    /// tenure that was applied.
    ///
    /// # Panics
    ///
    /// Panics if `c` is the current color of `v` or `c >= k`.
    pub fn apply_move(&mut self, v: Vertex, c: Color, t: u64) -> u64 {
        let k = self.k;
        let old = self.coloring.color(v);
        assert!(c != old && c < k, "invalid move ({v}, {c})");

        let delta = self.delta(v, c);
        self.coloring.set(v, c);
        self.conflict_count = (self.conflict_count as i64 + delta as i64) as usize;

        for &u in self.graph.neighbors(v) {
            let u = u as usize;
            let row = &mut self.adjacent[u * k..(u + 1) * k];
            row[old] -= 1;
            row[c] += 1;
            let cu = self.coloring.color(u);
            if cu == old && row[old] == 0 {
                self.conflicting.remove(u);
            } else if cu == c && row[c] == 1 {
                self.conflicting.insert(u);
            }
        }
        if self.adjacent[v * k + c] > 0 {
            self.conflicting.insert(v);
        } else {
            self.conflicting.remove(v);
        }

        let tenure = self.tenure();
        self.tabu.forbid_until(v, old, t + tenure + 1);
        if self.conflict_count < self.best_fitness {
            self.best_fitness = self.conflict_count;
        }
        tenure
    }

    /// Compares every incremental structure against a from-scratch
    /// recount. Returns a description of the first mismatch.
    pub fn check_consistency(&self) -> Result<(), String> {
        let g = self.graph;
        let recount = conflicts(g, &self.coloring);
        if recount != self.conflict_count {
            return Err(format!(
                "conflict count {} but edge scan gives {}",
                self.conflict_count, recount
            ));
        }
        let fresh = DeltaTable::recompute(g, &self.coloring);
        let incremental = self.delta_table();
        if fresh != incremental {
            for v in 0..g.vertex_count() {
                for c in 0..self.k {
                    if fresh.get(v, c) != incremental.get(v, c) {
                        return Err(format!(
                            "delta ({v}, {c}) is {} but recount gives {}",
                            incremental.get(v, c),
                            fresh.get(v, c)
                        ));
                    }
                }
            }
        }
        for v in 0..g.vertex_count() {
            let in_conflict = g
                .neighbors(v)
                .iter()
                .any(|&u| self.coloring.color(u as usize) == self.coloring.color(v));
            if in_conflict != self.conflicting.contains(v) {
                return Err(format!("conflicting-vertex flag wrong for {v}"));
            }
        }
        Ok(())
    }
}

/// One iteration of a traced run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepRecord {
    /// 1-based index of the move just applied.
    pub iteration: u64,
    pub mv: Move,
    pub fitness: usize,
    pub best_fitness: usize,
}

/// Result of [`tabucol`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabuColOutcome {
    pub best: Coloring,
    pub best_fitness: usize,
    pub iters_used: u64,
}

/// Runs TabuCol from `start` for at most `params.max_iters` moves,
/// stopping early at a legal coloring. Returns the best coloring seen.
pub fn tabucol(g: &Graph, start: &Coloring, params: &TabuColParams) -> TabuColOutcome {
    tabucol_observed(g, start, params, |_| {})
}

/// [`tabucol`] with a callback after every applied move.
pub fn tabucol_observed<F>(
    g: &Graph,
    start: &Coloring,
    params: &TabuColParams,
    mut observe: F,
) -> TabuColOutcome
where
    F: FnMut(&StepRecord),
{
    let mut search = TabuSearch::new(g, start.clone(), params);
    let mut best = start.clone();
    let mut best_fitness = search.fitness();
    let mut t = 0u64;

    while t < params.max_iters && search.fitness() > 0 {
        let Some(mv) = search.select_move(t) else {
            break;
        };
        debug_assert!(search.is_conflicting(mv.vertex), "non-critic move selected");
        search.apply_move(mv.vertex, mv.color, t);
        t += 1;
        if search.fitness() < best_fitness {
            best_fitness = search.fitness();
            best.clone_from(search.coloring());
        }
        observe(&StepRecord {
            iteration: t,
            mv,
            fitness: search.fitness(),
            best_fitness,
        });
    }

    TabuColOutcome {
        best,
        best_fitness,
        iters_used: t,
    }
}
