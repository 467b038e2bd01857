//! Uniform lattice graphs with n-sector edge structure and static obstacles.

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("sector count must be at least 1")]
    ZeroSector,
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
    #[error("invalid obstacle #{index}: {reason}")]
    InvalidObstacle { index: usize, reason: String },
    #[error("every lattice node lies inside an obstacle; the graph is empty")]
    Empty,
}

/// Lattice layout: `nx` by `ny` nodes spaced `dx`, `dy` from `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: Vec2,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub sector: u32,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), GridError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(GridError::InvalidSpec(format!(
                "need at least 2 nodes per axis, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.dx > 0.0 && self.dx.is_finite() && self.dy > 0.0 && self.dy.is_finite()) {
            return Err(GridError::InvalidSpec(format!(
                "spacing must be positive and finite, got dx={} dy={}",
                self.dx, self.dy
            )));
        }
        if !self.origin.is_finite() {
            return Err(GridError::InvalidSpec("origin must be finite".into()));
        }
        if self.sector == 0 {
            return Err(GridError::ZeroSector);
        }
        Ok(())
    }

    pub fn node_position(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + i as f64 * self.dx,
            self.origin.y + j as f64 * self.dy,
        )
    }

    /// Opposite corner of the lattice bounding box.
    pub fn extent_max(&self) -> Vec2 {
        self.node_position(self.nx - 1, self.ny - 1)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let max = self.extent_max();
        p.x >= self.origin.x && p.x <= max.x && p.y >= self.origin.y && p.y <= max.y
    }

    /// Directed edge count of the obstacle-free lattice.
    pub fn free_edge_count(&self) -> Result<usize, GridError> {
        Ok(sector_offsets(self.sector)?
            .iter()
            .map(|&(i, j)| {
                let cx = self.nx.saturating_sub(i.unsigned_abs() as usize);
                let cy = self.ny.saturating_sub(j.unsigned_abs() as usize);
                cx * cy
            })
            .sum())
    }
}

/// Lattice offsets of an n-sector node: every primitive vector (coprime
/// components) with Chebyshev length at most `n`.
pub fn sector_offsets(n: u32) -> Result<Vec<(i32, i32)>, GridError> {
    if n == 0 {
        return Err(GridError::ZeroSector);
    }
    let n = n as i32;
    let mut out = Vec::new();
    for j in -n..=n {
        for i in -n..=n {
            if (i, j) != (0, 0) && i.abs().gcd(&j.abs()) == 1 {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

/// Static obstacle. Regions are closed: the boundary counts as blocked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum Obstacle {
    Circle {
        center: Vec2,
        radius: f64,
    },
    Rectangle {
        min: Vec2,
        max: Vec2,
    },
    /// Convex polygon with counter-clockwise vertices.
    Polygon {
        vertices: Vec<Vec2>,
    },
}

impl Obstacle {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Obstacle::Circle { center, radius } => {
                if !center.is_finite() || !(radius.is_finite() && *radius > 0.0) {
                    return Err(format!(
                        "circle needs a finite center and positive radius, got {radius}"
                    ));
                }
            }
            Obstacle::Rectangle { min, max } => {
                if !min.is_finite() || !max.is_finite() || !(max.x > min.x && max.y > min.y) {
                    return Err("rectangle needs min < max on both axes".into());
                }
            }
            Obstacle::Polygon { vertices } => {
                if vertices.len() < 3 || vertices.iter().any(|v| !v.is_finite()) {
                    return Err("polygon needs at least 3 finite vertices".into());
                }
                let n = vertices.len();
                let mut area2 = 0.0;
                for k in 0..n {
                    let (a, b, c) = (vertices[k], vertices[(k + 1) % n], vertices[(k + 2) % n]);
                    area2 += a.cross(b);
                    if (b - a).cross(c - b) < 0.0 {
                        return Err("polygon must be convex and counter-clockwise".into());
                    }
                }
                if area2 <= 0.0 {
                    return Err(
                        "polygon must have positive area with counter-clockwise winding".into(),
                    );
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            Obstacle::Circle { center, radius } => (p - *center).norm_squared() <= radius * radius,
            Obstacle::Rectangle { min, max } => {
                p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y
            }
            Obstacle::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|k| {
                    let a = vertices[k];
                    let b = vertices[(k + 1) % n];
                    (b - a).cross(p - a) >= 0.0
                })
            }
        }
    }

    /// True if the closed segment `p1`-`p2` touches the closed region.
    pub fn intersects_segment(&self, p1: Vec2, p2: Vec2) -> bool {
        match self {
            Obstacle::Circle { center, radius } => {
                let s = Vec2::project_onto_segment(*center, p1, p2);
                (p1.lerp(p2, s) - *center).norm_squared() <= radius * radius
            }
            Obstacle::Rectangle { min, max } => {
                let corners = [*min, Vec2::new(max.x, min.y), *max, Vec2::new(min.x, max.y)];
                clip_convex(&corners, p1, p2)
            }
            Obstacle::Polygon { vertices } => clip_convex(vertices, p1, p2),
        }
    }
}

/// Cyrus-Beck clipping of a segment against a closed convex CCW polygon.
fn clip_convex(vertices: &[Vec2], p1: Vec2, p2: Vec2) -> bool {
    let d = p2 - p1;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let n = vertices.len();
    for k in 0..n {
        let a = vertices[k];
        let edge = vertices[(k + 1) % n] - a;
        // Inside is where edge x (p - a) >= 0.
        let start = edge.cross(p1 - a);
        let rate = edge.cross(d);
        if rate == 0.0 {
            if start < 0.0 {
                return false;
            }
        } else {
            let s = -start / rate;
            if rate > 0.0 {
                lo = lo.max(s);
            } else {
                hi = hi.min(s);
            }
            if lo > hi {
                return false;
            }
        }
    }
    true
}

pub fn segment_blocked(p1: Vec2, p2: Vec2, obstacles: &[Obstacle]) -> bool {
    obstacles.iter().any(|o| o.intersects_segment(p1, p2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub target: usize,
    pub length: f64,
    /// Unit vector from source to target.
    pub direction: Vec2,
}

/// Lattice graph in compressed adjacency form. Vertex ids are row-major over
/// the surviving lattice nodes.
#[derive(Debug, Clone)]
pub struct Graph {
    spec: Option<GridSpec>,
    positions: Vec<Vec2>,
    cells: Vec<(usize, usize)>,
    lattice: Vec<Option<usize>>,
    first_edge: Vec<usize>,
    edges: Vec<Edge>,
}

impl Graph {
    /// Lattice layout, or `None` for graphs built from explicit edge lists.
    pub fn spec(&self) -> Option<&GridSpec> {
        self.spec.as_ref()
    }

    /// Arbitrary directed graph over `positions`. Used for testing the searches
    /// off-lattice; edges must join distinct positions.
    pub fn from_edges(
        positions: Vec<Vec2>,
        edge_list: &[(usize, usize)],
    ) -> Result<Graph, GridError> {
        if positions.is_empty() {
            return Err(GridError::Empty);
        }
        let n = positions.len();
        let mut sorted = edge_list.to_vec();
        sorted.sort_by_key(|&(u, _)| u);
        let mut first_edge = Vec::with_capacity(n + 1);
        let mut edges = Vec::with_capacity(sorted.len());
        let mut next = sorted.iter().peekable();
        for u in 0..n {
            first_edge.push(edges.len());
            while let Some(&&(from, to)) = next.peek() {
                if from != u {
                    break;
                }
                next.next();
                if to >= n {
                    return Err(GridError::InvalidSpec(format!(
                        "edge {from}->{to} leaves the vertex set"
                    )));
                }
                let delta = positions[to] - positions[from];
                let length = delta.norm();
                if !(length > 0.0) {
                    return Err(GridError::InvalidSpec(format!(
                        "edge {from}->{to} has zero length"
                    )));
                }
                edges.push(Edge {
                    target: to,
                    length,
                    direction: delta * (1.0 / length),
                });
            }
        }
        if let Some(&(from, _)) = next.next() {
            return Err(GridError::InvalidSpec(format!(
                "edge source {from} is not a vertex"
            )));
        }
        first_edge.push(edges.len());
        Ok(Graph {
            spec: None,
            cells: Vec::new(),
            lattice: Vec::new(),
            positions,
            first_edge,
            edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn position(&self, v: usize) -> Vec2 {
        self.positions[v]
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    /// Lattice coordinates (i, j) of vertex `v`.
    pub fn cell(&self, v: usize) -> Option<(usize, usize)> {
        self.cells.get(v).copied()
    }

    pub fn vertex_at(&self, i: usize, j: usize) -> Option<usize> {
        let spec = self.spec.as_ref()?;
        if i >= spec.nx || j >= spec.ny {
            return None;
        }
        self.lattice[j * spec.nx + i]
    }

    /// Out-edges of `v`; their ids are `edge_range(v)`.
    pub fn edges_from(&self, v: usize) -> &[Edge] {
        &self.edges[self.edge_range(v)]
    }

    pub fn edge_range(&self, v: usize) -> std::ops::Range<usize> {
        self.first_edge[v]..self.first_edge[v + 1]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Iterates `(source, edge_id, edge)` over all edges.
    pub fn edge_iter(&self) -> impl Iterator<Item = (usize, usize, &Edge)> + '_ {
        (0..self.vertex_count())
            .flat_map(move |u| self.edge_range(u).map(move |e| (u, e, &self.edges[e])))
    }

    /// Nearest existing vertex to `p` and its distance; ties go to the lower id.
    pub fn nearest_vertex(&self, p: Vec2) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (v, q) in self.positions.iter().enumerate() {
            let d = p.distance(*q);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((v, d));
            }
        }
        best
    }
}

pub fn build_grid(spec: &GridSpec, obstacles: &[Obstacle]) -> Result<Graph, GridError> {
    spec.validate()?;
    for (index, o) in obstacles.iter().enumerate() {
        o.validate()
            .map_err(|reason| GridError::InvalidObstacle { index, reason })?;
    }

    let mut positions = Vec::new();
    let mut cells = Vec::new();
    let mut lattice = vec![None; spec.nx * spec.ny];
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let p = spec.node_position(i, j);
            if obstacles.iter().any(|o| o.contains(p)) {
                continue;
            }
            lattice[j * spec.nx + i] = Some(positions.len());
            positions.push(p);
            cells.push((i, j));
        }
    }
    if positions.is_empty() {
        return Err(GridError::Empty);
    }

    let offsets = sector_offsets(spec.sector)?;
    let mut first_edge = Vec::with_capacity(positions.len() + 1);
    let mut edges = Vec::new();
    for (v, &(i, j)) in cells.iter().enumerate() {
        first_edge.push(edges.len());
        let from = positions[v];
        for &(di, dj) in &offsets {
            let ti = i as i64 + di as i64;
            let tj = j as i64 + dj as i64;
            if ti < 0 || tj < 0 || ti >= spec.nx as i64 || tj >= spec.ny as i64 {
                continue;
            }
            let Some(target) = lattice[tj as usize * spec.nx + ti as usize] else {
                continue;
            };
            let to = positions[target];
            if segment_blocked(from, to, obstacles) {
                continue;
            }
            let delta = to - from;
            let length = delta.norm();
            edges.push(Edge {
                target,
                length,
                direction: delta * (1.0 / length),
            });
        }
    }
    first_edge.push(edges.len());

    Ok(Graph {
        spec: Some(*spec),
        positions,
        cells,
        lattice,
        first_edge,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(nx: usize, ny: usize, sector: u32) -> GridSpec {
        GridSpec {
            origin: Vec2::ZERO,
            nx,
            ny,
            dx: 1.0,
            dy: 1.0,
            sector,
        }
    }

    #[test]
    fn offset_counts() {
        assert!(sector_offsets(0).is_err());
        let one = sector_offsets(1).unwrap();
        assert_eq!(one.len(), 8);
        let two = sector_offsets(2).unwrap();
        assert_eq!(two.len(), 16);
        for knight in [(1, 2), (2, 1), (-1, 2), (-2, -1)] {
            assert!(two.contains(&knight));
        }
        let three = sector_offsets(3).unwrap();
        assert_eq!(three.len(), 32);
        assert!(three.contains(&(3, 2)) && three.contains(&(-1, -3)));
        assert!(!three.contains(&(2, 2)) && !three.contains(&(3, 0)));
    }

    #[test]
    fn offsets_nest_and_are_symmetric() {
        for n in 1..6 {
            let small = sector_offsets(n).unwrap();
            let big = sector_offsets(n + 1).unwrap();
            for &(i, j) in &small {
                assert!(big.contains(&(i, j)));
                assert!(small.contains(&(-i, -j)));
                assert!(small.contains(&(j, i)));
            }
        }
    }

    #[test]
    fn published_counts_31x13() {
        for (sector, edges) in [(1, 2964), (2, 5676), (3, 10612)] {
            let g = build_grid(&spec(31, 13, sector), &[]).unwrap();
            assert_eq!(g.vertex_count(), 403);
            assert_eq!(g.edge_count(), edges);
            assert_eq!(spec(31, 13, sector).free_edge_count().unwrap(), edges);
        }
    }

    #[test]
    fn edges_have_reverse_and_correct_length() {
        let g = build_grid(&spec(7, 5, 3), &[]).unwrap();
        for (u, _, e) in g.edge_iter() {
            assert_ne!(u, e.target);
            assert!(g.edges_from(e.target).iter().any(|r| r.target == u));
            assert!((e.length - g.position(u).distance(g.position(e.target))).abs() < 1e-12);
        }
    }

    #[test]
    fn rectangle_masks_45_nodes() {
        let s = GridSpec {
            sector: 3,
            ..spec(41, 21, 3)
        };
        let block = Obstacle::Rectangle {
            min: Vec2::new(15.5, 7.5),
            max: Vec2::new(24.5, 12.5),
        };
        let g = build_grid(&s, &[block]).unwrap();
        assert_eq!(g.vertex_count(), 861 - 45);
        let free = build_grid(&s, &[]).unwrap();
        assert!(g.edge_count() < free.edge_count());
        assert_eq!(g.vertex_at(20, 10), None);
        assert!(g.vertex_at(0, 0).is_some());
    }

    #[test]
    fn all_nodes_covered_is_an_error() {
        let block = Obstacle::Circle {
            center: Vec2::new(1.0, 1.0),
            radius: 10.0,
        };
        assert_eq!(
            build_grid(&spec(3, 3, 1), &[block]).unwrap_err(),
            GridError::Empty
        );
    }

    #[test]
    fn edge_between_free_nodes_can_be_blocked() {
        // The obstacle sits between lattice nodes.
        let o = Obstacle::Circle {
            center: Vec2::new(0.5, 0.0),
            radius: 0.2,
        };
        let g = build_grid(&spec(2, 2, 1), &[o]).unwrap();
        assert_eq!(g.vertex_count(), 4);
        let a = g.vertex_at(0, 0).unwrap();
        let b = g.vertex_at(1, 0).unwrap();
        assert!(!g.edges_from(a).iter().any(|e| e.target == b));
    }

    #[test]
    fn segment_blocking_cases() {
        let circle = Obstacle::Circle {
            center: Vec2::new(0.0, 0.0),
            radius: 1.0,
        };
        let obstacles = [circle];
        assert!(segment_blocked(
            Vec2::new(-5.0, 0.0),
            Vec2::new(5.0, 0.0),
            &obstacles
        ));
        assert!(!segment_blocked(
            Vec2::new(-5.0, 3.0),
            Vec2::new(5.0, 3.0),
            &obstacles
        ));
        // Tangent counts as blocked.
        assert!(segment_blocked(
            Vec2::new(-5.0, 1.0),
            Vec2::new(5.0, 1.0),
            &obstacles
        ));
        // Stops short of the circle.
        assert!(!segment_blocked(
            Vec2::new(-5.0, 0.0),
            Vec2::new(-1.5, 0.0),
            &obstacles
        ));

        let rect = Obstacle::Rectangle {
            min: Vec2::new(0.0, 0.0),
            max: Vec2::new(2.0, 1.0),
        };
        let r = [rect];
        assert!(segment_blocked(
            Vec2::new(-1.0, 0.5),
            Vec2::new(3.0, 0.5),
            &r
        ));
        assert!(segment_blocked(
            Vec2::new(-1.0, 1.0),
            Vec2::new(3.0, 1.0),
            &r
        ));
        assert!(!segment_blocked(
            Vec2::new(2.0, 2.0),
            Vec2::new(3.0, 1.0),
            &r
        ));
        assert!(segment_blocked(
            Vec2::new(1.0, 2.0),
            Vec2::new(3.0, 0.0),
            &r
        ));
        assert!(!segment_blocked(
            Vec2::new(-1.0, 2.0),
            Vec2::new(-0.5, -3.0),
            &r
        ));
        // Segment fully inside.
        assert!(segment_blocked(
            Vec2::new(0.5, 0.5),
            Vec2::new(1.5, 0.5),
            &r
        ));

        let tri = Obstacle::Polygon {
            vertices: vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(2.0, 0.0),
                Vec2::new(0.0, 2.0),
            ],
        };
        let t = [tri];
        assert!(segment_blocked(
            Vec2::new(-1.0, 0.5),
            Vec2::new(3.0, 0.5),
            &t
        ));
        assert!(!segment_blocked(
            Vec2::new(0.0, 3.0),
            Vec2::new(3.0, 0.0),
            &t
        ));
        // Runs along the hypotenuse.
        assert!(segment_blocked(
            Vec2::new(0.0, 2.0),
            Vec2::new(2.0, 0.0),
            &t
        ));
    }

    #[test]
    fn obstacle_validation() {
        let cw = Obstacle::Polygon {
            vertices: vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(0.0, 2.0),
                Vec2::new(2.0, 0.0),
            ],
        };
        assert!(cw.validate().is_err());
        let concave = Obstacle::Polygon {
            vertices: vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(4.0, 0.0),
                Vec2::new(2.0, 1.0),
                Vec2::new(4.0, 4.0),
                Vec2::new(0.0, 4.0),
            ],
        };
        assert!(concave.validate().is_err());
        assert!(Obstacle::Circle {
            center: Vec2::ZERO,
            radius: 0.0
        }
        .validate()
        .is_err());
        assert!(Obstacle::Rectangle {
            min: Vec2::new(1.0, 0.0),
            max: Vec2::new(1.0, 3.0)
        }
        .validate()
        .is_err());
    }

    #[test]
    fn nearest_vertex_snaps() {
        let g = build_grid(
            &GridSpec {
                dx: 10.0,
                dy: 5.0,
                ..spec(31, 13, 1)
            },
            &[],
        )
        .unwrap();
        let (v, d) = g.nearest_vertex(Vec2::new(301.0, 29.0)).unwrap();
        assert_eq!(g.cell(v), Some((30, 6)));
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
    }
}
