//! Single-source searches over a [`Graph`].
//!
//! [`dijkstra`] is the classic algorithm over precomputed, non-negative edge
//! weights. [`tve`] evaluates each edge weight on the fly at the departure
//! time `d[u]` and, unlike Dijkstra, re-inserts an already settled (black)
//! vertex whenever a later relaxation improves its arrival time. Both return
//! absolute arrival times and predecessor lists.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{traverse, TravelTime};
use crate::flow::FlowField;
use crate::geometry::Vec2;
use crate::grid::{Edge, Graph};

/// Total insertions allowed per vertex before a search is aborted.
pub const DEFAULT_INSERTION_CAP_FACTOR: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("source vertex {vertex} out of range ({vertices} vertices)")]
    SourceOutOfRange { vertex: usize, vertices: usize },
    #[error("start time must be finite")]
    NonFiniteStart,
    #[error("expected {expected} edge weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("edge {edge} has invalid weight {weight}; weights must be non-negative")]
    NegativeWeight { edge: usize, weight: f64 },
    #[error("search aborted after {insertions} queue insertions (cap {cap}); the edge costs are likely not FIFO")]
    InsertionCapExceeded { insertions: usize, cap: usize },
    #[error("no feasible path to vertex {goal}")]
    NoFeasiblePath { goal: usize },
}

/// Time-dependent edge cost.
pub trait EdgeWeight {
    /// Travel time of `edge` leaving `from` at absolute time `depart`.
    fn travel_time(&self, from: Vec2, edge: &Edge, depart: f64) -> f64;
}

impl<F: FlowField + ?Sized> EdgeWeight for TravelTime<'_, F> {
    fn travel_time(&self, from: Vec2, edge: &Edge, depart: f64) -> f64 {
        traverse(
            from,
            edge.direction,
            edge.length,
            depart,
            self.field,
            &self.vehicle,
            &self.cfg,
        )
    }
}

impl<T: Fn(Vec2, &Edge, f64) -> f64> EdgeWeight for T {
    fn travel_time(&self, from: Vec2, edge: &Edge, depart: f64) -> f64 {
        self(from, edge, depart)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Color {
    White,
    Gray,
    Black,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub extractions: usize,
    pub insertions: usize,
    /// Insertions of vertices that had already been settled.
    pub reexpansions: usize,
    pub relaxations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub source: usize,
    pub start_time: f64,
    /// Arrival time per vertex; `INFINITY` when unreached.
    pub arrival: Vec<f64>,
    pub predecessor: Vec<Option<usize>>,
    pub stats: SearchStats,
}

impl SearchResult {
    pub fn is_reached(&self, v: usize) -> bool {
        self.arrival[v].is_finite()
    }

    pub fn duration(&self, v: usize) -> f64 {
        self.arrival[v] - self.start_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Stop as soon as this vertex is extracted from the queue.
    pub goal: Option<usize>,
    pub insertion_cap_factor: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            goal: None,
            insertion_cap_factor: DEFAULT_INSERTION_CAP_FACTOR,
        }
    }
}

/// Binary min-heap over vertex ids supporting decrease-key. Ties on the key
/// go to the lower vertex id.
#[derive(Debug)]
struct IndexedHeap {
    heap: Vec<usize>,
    slot: Vec<usize>,
    key: Vec<f64>,
}

const ABSENT: usize = usize::MAX;

impl IndexedHeap {
    fn new(n: usize) -> Self {
        Self {
            heap: Vec::new(),
            slot: vec![ABSENT; n],
            key: vec![f64::INFINITY; n],
        }
    }

    #[cfg(test)]
    fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    fn less(&self, a: usize, b: usize) -> bool {
        match self.key[a].total_cmp(&self.key[b]) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => a < b,
        }
    }

    fn insert(&mut self, v: usize, key: f64) {
        debug_assert_eq!(self.slot[v], ABSENT);
        self.key[v] = key;
        self.slot[v] = self.heap.len();
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1);
    }

    fn decrease_key(&mut self, v: usize, key: f64) {
        debug_assert!(self.slot[v] != ABSENT && key <= self.key[v]);
        self.key[v] = key;
        self.sift_up(self.slot[v]);
    }

    fn extract_min(&mut self) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.slot[top] = ABSENT;
        if last != top {
            self.heap[0] = last;
            self.slot[last] = 0;
            self.sift_down(0);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if !self.less(self.heap[i], self.heap[parent]) {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            let r = l + 1;
            let mut m = i;
            if l < n && self.less(self.heap[l], self.heap[m]) {
                m = l;
            }
            if r < n && self.less(self.heap[r], self.heap[m]) {
                m = r;
            }
            if m == i {
                break;
            }
            self.swap(i, m);
            i = m;
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.slot[self.heap[a]] = a;
        self.slot[self.heap[b]] = b;
    }
}

/// Shared driver. `reinsert_settled` selects the TVE rule; `weight` receives
/// `(u, edge_id, edge, d[u])`.
fn label_search(
    graph: &Graph,
    source: usize,
    start: f64,
    opts: &SearchOptions,
    reinsert_settled: bool,
    mut weight: impl FnMut(usize, usize, &Edge, f64) -> f64,
) -> Result<SearchResult, SearchError> {
    let n = graph.vertex_count();
    if source >= n {
        return Err(SearchError::SourceOutOfRange {
            vertex: source,
            vertices: n,
        });
    }
    if !start.is_finite() {
        return Err(SearchError::NonFiniteStart);
    }
    let cap = opts.insertion_cap_factor.saturating_mul(n).max(1);

    let mut d = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut color = vec![Color::White; n];
    let mut queue = IndexedHeap::new(n);
    let mut stats = SearchStats::default();

    color[source] = Color::Gray;
    d[source] = start;
    queue.insert(source, start);
    stats.insertions = 1;

    while let Some(u) = queue.extract_min() {
        color[u] = Color::Black;
        stats.extractions += 1;
        if opts.goal == Some(u) {
            break;
        }
        let du = d[u];
        for e in graph.edge_range(u) {
            let edge = &graph.edges()[e];
            let v = edge.target;
            let dv = weight(u, e, edge, du) + du;
            stats.relaxations += 1;
            if dv < d[v] {
                d[v] = dv;
                pred[v] = Some(u);
                match color[v] {
                    Color::Gray => queue.decrease_key(v, dv),
                    Color::White => {
                        color[v] = Color::Gray;
                        queue.insert(v, dv);
                        stats.insertions += 1;
                    }
                    Color::Black if reinsert_settled => {
                        color[v] = Color::Gray;
                        queue.insert(v, dv);
                        stats.insertions += 1;
                        stats.reexpansions += 1;
                    }
                    Color::Black => {}
                }
                if stats.insertions > cap {
                    return Err(SearchError::InsertionCapExceeded {
                        insertions: stats.insertions,
                        cap,
                    });
                }
            }
        }
    }

    Ok(SearchResult {
        source,
        start_time: start,
        arrival: d,
        predecessor: pred,
        stats,
    })
}

/// Classic Dijkstra with one precomputed weight per edge id; `d[source] = 0`.
pub fn dijkstra(
    graph: &Graph,
    source: usize,
    weights: &[f64],
) -> Result<SearchResult, SearchError> {
    dijkstra_with_options(graph, source, 0.0, weights, &SearchOptions::default())
}

/// Dijkstra whose source label is `start_time` instead of zero.
pub fn dijkstra_from(
    graph: &Graph,
    source: usize,
    start_time: f64,
    weights: &[f64],
) -> Result<SearchResult, SearchError> {
    dijkstra_with_options(
        graph,
        source,
        start_time,
        weights,
        &SearchOptions::default(),
    )
}

pub fn dijkstra_with_options(
    graph: &Graph,
    source: usize,
    start_time: f64,
    weights: &[f64],
    opts: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    if weights.len() != graph.edge_count() {
        return Err(SearchError::WeightCount {
            expected: graph.edge_count(),
            got: weights.len(),
        });
    }
    if let Some((edge, &weight)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0)) {
        return Err(SearchError::NegativeWeight { edge, weight });
    }
    label_search(graph, source, start_time, opts, false, |_, e, _, _| {
        weights[e]
    })
}

/// Time-varying-environment search starting at absolute time `t0`.
pub fn tve<W: EdgeWeight + ?Sized>(
    graph: &Graph,
    source: usize,
    t0: f64,
    weight: &W,
) -> Result<SearchResult, SearchError> {
    tve_with_options(graph, source, t0, weight, &SearchOptions::default())
}

pub fn tve_with_options<W: EdgeWeight + ?Sized>(
    graph: &Graph,
    source: usize,
    t0: f64,
    weight: &W,
    opts: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    let positions = graph.positions();
    label_search(graph, source, t0, opts, true, |u, _, edge, du| {
        weight.travel_time(positions[u], edge, du)
    })
}

/// Evaluates a time-dependent weight once per edge at a fixed departure time.
pub fn precompute_weights<W: EdgeWeight + ?Sized>(
    graph: &Graph,
    weight: &W,
    depart: f64,
) -> Vec<f64> {
    graph
        .edge_iter()
        .map(|(u, _, e)| weight.travel_time(graph.position(u), e, depart))
        .collect()
}

/// Vertex sequence from the search source to `goal`. Paths whose duration
/// reaches `large_weight` used an infeasible edge and are rejected.
pub fn extract_path(
    result: &SearchResult,
    goal: usize,
    large_weight: f64,
) -> Result<Vec<usize>, SearchError> {
    let n = result.arrival.len();
    if goal >= n || !result.is_reached(goal) || result.duration(goal) >= large_weight {
        return Err(SearchError::NoFeasiblePath { goal });
    }
    let mut path = vec![goal];
    let mut v = goal;
    while v != result.source {
        match result.predecessor[v] {
            Some(u) if path.len() <= n => {
                path.push(u);
                v = u;
            }
            _ => return Err(SearchError::NoFeasiblePath { goal }),
        }
    }
    path.reverse();
    Ok(path)
}

/// An edge that could still improve its target after a search finished.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub from: usize,
    pub to: usize,
    pub candidate: f64,
    pub recorded: f64,
}

/// Sweeps every edge out of a reached vertex and reports those with
/// `w(u, v, d[u]) + d[u] < d[v] - tol`.
pub fn fixed_point_violations<W: EdgeWeight + ?Sized>(
    graph: &Graph,
    result: &SearchResult,
    weight: &W,
    tol: f64,
) -> Vec<Violation> {
    graph
        .edge_iter()
        .filter(|(u, _, _)| result.is_reached(*u))
        .filter_map(|(u, _, e)| {
            let du = result.arrival[u];
            let candidate = weight.travel_time(graph.position(u), e, du) + du;
            (candidate < result.arrival[e.target] - tol).then_some(Violation {
                from: u,
                to: e.target,
                candidate,
                recorded: result.arrival[e.target],
            })
        })
        .collect()
}

/// Reached vertices whose arrival differs from `d[pred] + w(pred, v, d[pred])`
/// by more than `tol`.
pub fn predecessor_mismatches<W: EdgeWeight + ?Sized>(
    graph: &Graph,
    result: &SearchResult,
    weight: &W,
    tol: f64,
) -> Vec<usize> {
    (0..graph.vertex_count())
        .filter(|&v| v != result.source && result.is_reached(v))
        .filter(|&v| {
            let Some(u) = result.predecessor[v] else {
                return true;
            };
            let Some(edge) = graph.edges_from(u).iter().find(|e| e.target == v) else {
                return true;
            };
            let du = result.arrival[u];
            let expected = du + weight.travel_time(graph.position(u), edge, du);
            (expected - result.arrival[v]).abs() > tol
        })
        .collect()
}
