//! Finite metric trees.
//!
//! Edges are stored as `(a, b, length)`; a point on edge `e` carries its
//! arc-length from `a`. Vertex distances use the lowest common ancestor on the
//! tree rooted at `root`.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Piece, Point};

/// Slack for edge coordinates slightly outside `[0, ℓ]` and for vertex snapping.
const COORD_SLACK: f64 = 1e-12;

/// Construction data for a tree: vertex ids, weighted edges and a root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub vertices: Vec<u64>,
    pub edges: Vec<(u64, u64, f64)>,
    pub root: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Internal vertex index of the start (`s = 0`).
    pub a: usize,
    /// Internal vertex index of the end (`s = length`).
    pub b: usize,
    pub length: f64,
}

impl Edge {
    /// Arc-length coordinate of vertex `v` on this edge.
    pub fn coord_of(&self, v: usize) -> f64 {
        if v == self.a {
            0.0
        } else {
            self.length
        }
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTree {
    params: TreeParams,
    edges: Vec<Edge>,
    root: usize,
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    root_dist: Vec<f64>,
    incident: Vec<Vec<usize>>,
}

impl MetricTree {
    pub fn new(params: TreeParams) -> Result<Self> {
        let n = params.vertices.len();
        if n == 0 {
            return Err(Error::InvalidTree("no vertices".into()));
        }
        let mut index = BTreeMap::new();
        for (i, &id) in params.vertices.iter().enumerate() {
            if index.insert(id, i).is_some() {
                return Err(Error::InvalidTree(format!("duplicate vertex id {id}")));
            }
        }
        let lookup = |id: u64| {
            index
                .get(&id)
                .copied()
                .ok_or_else(|| Error::InvalidTree(format!("unknown vertex id {id}")))
        };
        if params.edges.len() + 1 != n {
            return Err(Error::InvalidTree(format!(
                "{} vertices need {} edges, got {}",
                n,
                n - 1,
                params.edges.len()
            )));
        }
        let mut edges = Vec::with_capacity(params.edges.len());
        let mut incident = vec![Vec::new(); n];
        for (e, &(a, b, length)) in params.edges.iter().enumerate() {
            let (a, b) = (lookup(a)?, lookup(b)?);
            if a == b {
                return Err(Error::InvalidTree(format!("edge {e} is a loop")));
            }
            if !(length > 0.0 && length.is_finite()) {
                return Err(Error::InvalidTree(format!("edge {e} has length {length}")));
            }
            edges.push(Edge { a, b, length });
            incident[a].push(e);
            incident[b].push(e);
        }
        let root = lookup(params.root)?;

        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut root_dist = vec![0.0; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &e in &incident[v] {
                let w = edges[e].other(v);
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                parent[w] = Some((v, e));
                depth[w] = depth[v] + 1;
                root_dist[w] = root_dist[v] + edges[e].length;
                queue.push_back(w);
            }
        }
        if seen.iter().any(|s| !s) {
            // n - 1 edges and disconnected means a cycle somewhere.
            return Err(Error::InvalidTree("graph is not connected".into()));
        }
        Ok(Self { params, edges, root, parent, depth, root_dist, incident })
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.depth.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Edge ids incident to internal vertex `v`, ascending.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub(crate) fn validate(&self, p: &Point) -> Result<()> {
        let edge = self
            .edges
            .get(p.chart)
            .ok_or_else(|| Error::InvalidPoint(format!("edge {} does not exist", p.chart)))?;
        match p.coords.as_slice() {
            [s] if s.is_finite() && *s >= -COORD_SLACK && *s <= edge.length + COORD_SLACK => Ok(()),
            [s] => Err(Error::InvalidPoint(format!(
                "coordinate {s} outside [0, {}] on edge {}",
                edge.length, p.chart
            ))),
            c => Err(Error::InvalidPoint(format!("tree points need 1 coordinate, got {}", c.len()))),
        }
    }

    fn coord(&self, p: &Point) -> f64 {
        p.coords[0].clamp(0.0, self.edges[p.chart].length)
    }

    /// The vertex a point sits on, if any.
    pub fn vertex_of(&self, p: &Point) -> Option<usize> {
        let edge = &self.edges[p.chart];
        let s = p.coords[0];
        if s <= COORD_SLACK {
            Some(edge.a)
        } else if s >= edge.length - COORD_SLACK {
            Some(edge.b)
        } else {
            None
        }
    }

    /// Canonical representation of vertex `v`: on its lowest-id incident edge.
    pub fn vertex_point(&self, v: usize) -> Point {
        let e = self.incident[v][0];
        Point::on_edge(e, self.edges[e].coord_of(v))
    }

    pub(crate) fn normalize(&self, p: &Point) -> Point {
        match self.vertex_of(p) {
            Some(v) => self.vertex_point(v),
            None => Point::on_edge(p.chart, self.coord(p)),
        }
    }

    fn lca(&self, mut u: usize, mut w: usize) -> usize {
        while self.depth[u] > self.depth[w] {
            u = self.parent[u].expect("non-root has a parent").0;
        }
        while self.depth[w] > self.depth[u] {
            w = self.parent[w].expect("non-root has a parent").0;
        }
        while u != w {
            u = self.parent[u].expect("non-root has a parent").0;
            w = self.parent[w].expect("non-root has a parent").0;
        }
        u
    }

    pub fn vertex_distance(&self, u: usize, w: usize) -> f64 {
        let l = self.lca(u, w);
        self.root_dist[u] + self.root_dist[w] - 2.0 * self.root_dist[l]
    }

    /// Edges on the vertex path `u → w`, each as `(edge, from, to)`.
    pub fn vertex_path(&self, u: usize, w: usize) -> Vec<(usize, usize, usize)> {
        let l = self.lca(u, w);
        let mut up = Vec::new();
        let mut v = u;
        while v != l {
            let (p, e) = self.parent[v].expect("non-root has a parent");
            up.push((e, v, p));
            v = p;
        }
        let mut down = Vec::new();
        let mut v = w;
        while v != l {
            let (p, e) = self.parent[v].expect("non-root has a parent");
            down.push((e, p, v));
            v = p;
        }
        up.extend(down.into_iter().rev());
        up
    }

    /// Shortest route between two points: `(exit vertex of p's edge, entry
    /// vertex of q's edge, length)`, or `None` when both share an edge.
    fn route(&self, p: &Point, q: &Point) -> Option<(usize, usize, f64)> {
        if p.chart == q.chart {
            return None;
        }
        let (ep, eq) = (&self.edges[p.chart], &self.edges[q.chart]);
        let (s, t) = (self.coord(p), self.coord(q));
        let exits = [(ep.a, s), (ep.b, ep.length - s)];
        let entries = [(eq.a, t), (eq.b, eq.length - t)];
        let mut best: Option<(usize, usize, f64)> = None;
        for &(x, dx) in &exits {
            for &(y, dy) in &entries {
                let d = dx + self.vertex_distance(x, y) + dy;
                if best.is_none_or(|b| d < b.2) {
                    best = Some((x, y, d));
                }
            }
        }
        best
    }

    pub(crate) fn distance(&self, p: &Point, q: &Point) -> f64 {
        match self.route(p, q) {
            None => (self.coord(p) - self.coord(q)).abs(),
            Some((_, _, d)) => d,
        }
    }

    pub(crate) fn geodesic_pieces(&self, p: &Point, q: &Point) -> Vec<Piece> {
        let (s, t) = (self.coord(p), self.coord(q));
        let Some((x, y, _)) = self.route(p, q) else {
            return vec![Piece::new(p.chart, vec![s], vec![t])];
        };
        let mut pieces = vec![Piece::new(p.chart, vec![s], vec![self.edges[p.chart].coord_of(x)])];
        for (e, from, to) in self.vertex_path(x, y) {
            let edge = &self.edges[e];
            pieces.push(Piece::new(e, vec![edge.coord_of(from)], vec![edge.coord_of(to)]));
        }
        pieces.push(Piece::new(q.chart, vec![self.edges[q.chart].coord_of(y)], vec![t]));
        pieces
    }

    /// Intervals `(edge, s0, s1)` of the closed ball `B[center, radius]`.
    pub fn ball_pieces(&self, center: &Point, radius: f64) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for (e, edge) in self.edges.iter().enumerate() {
            let mut spans: Vec<(f64, f64)> = Vec::new();
            if e == center.chart {
                let c = self.coord(center);
                spans.push((c - radius, c + radius));
            } else {
                let da = self.distance(center, &Point::on_edge(e, 0.0));
                let db = self.distance(center, &Point::on_edge(e, edge.length));
                spans.push((f64::NEG_INFINITY, radius - da));
                spans.push((edge.length - (radius - db), f64::INFINITY));
            }
            let mut clipped: Vec<(f64, f64)> = spans
                .into_iter()
                .map(|(lo, hi)| (lo.max(0.0), hi.min(edge.length)))
                .filter(|(lo, hi)| hi > lo)
                .collect();
            clipped.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut merged: Vec<(f64, f64)> = Vec::new();
            for (lo, hi) in clipped {
                match merged.last_mut() {
                    Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                    _ => merged.push((lo, hi)),
                }
            }
            out.extend(merged.into_iter().map(|(lo, hi)| (e, lo, hi)));
        }
        out
    }
}

/// A star: one center vertex (id 0) and a leg of the given length to each leaf
/// `1..=k`. Leg `i` is edge `i`, parameterized outward from the center.
pub fn star_params(legs: &[f64]) -> TreeParams {
    TreeParams {
        vertices: (0..=legs.len() as u64).collect(),
        edges: legs.iter().enumerate().map(|(i, &l)| (0, i as u64 + 1, l)).collect(),
        root: 0,
    }
}

/// Maximum comb depth accepted by [`comb_params`].
pub const COMB_MAX_DEPTH: usize = 3;
/// Maximum comb grid accepted by [`comb_params`].
pub const COMB_MAX_GRID: usize = 16;

/// Finite truncation of the iterated rational comb.
///
/// Depth 0 is the unit segment. Each further generation glues a unit tooth at
/// every grid point `j / grid` of every tooth of the previous generation (for
/// the base segment `j = 0..=grid`, for teeth `j = 1..=grid`, since a tooth's
/// root already lies on its parent). Teeth that receive children are
/// subdivided at the grid points; last-generation teeth are single edges.
pub fn comb_params(depth: usize, grid: usize) -> Result<TreeParams> {
    if depth > COMB_MAX_DEPTH {
        return Err(Error::CapExceeded { what: "depth", value: depth, cap: COMB_MAX_DEPTH });
    }
    if grid > COMB_MAX_GRID {
        return Err(Error::CapExceeded { what: "grid", value: grid, cap: COMB_MAX_GRID });
    }
    if grid == 0 {
        return Err(Error::ParamOutOfRange { name: "grid", value: 0.0 });
    }
    let mut vertices = vec![0u64];
    let mut edges = Vec::new();
    let mut fresh = || {
        let id = vertices.len() as u64;
        vertices.push(id);
        id
    };
    if depth == 0 {
        let end = fresh();
        edges.push((0, end, 1.0));
        return Ok(TreeParams { vertices, edges, root: 0 });
    }
    // Base segment, subdivided: its grid vertices are the roots of generation 1.
    let step = 1.0 / grid as f64;
    let mut roots = vec![0u64];
    for _ in 0..grid {
        let v = fresh();
        edges.push((*roots.last().unwrap(), v, step));
        roots.push(v);
    }
    for generation in 1..=depth {
        let mut next_roots = Vec::new();
        for &r in &roots {
            if generation == depth {
                let tip = fresh();
                edges.push((r, tip, 1.0));
            } else {
                let mut prev = r;
                for _ in 0..grid {
                    let v = fresh();
                    edges.push((prev, v, step));
                    next_roots.push(v);
                    prev = v;
                }
            }
        }
        roots = next_roots;
    }
    Ok(TreeParams { vertices, edges, root: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_trees() {
        let cycle = TreeParams { vertices: vec![0, 1, 2], edges: vec![(0, 1, 1.0), (1, 0, 1.0)], root: 0 };
        assert!(matches!(MetricTree::new(cycle), Err(Error::InvalidTree(_))));
        let bad_len = TreeParams { vertices: vec![0, 1], edges: vec![(0, 1, 0.0)], root: 0 };
        assert!(MetricTree::new(bad_len).is_err());
        let unknown = TreeParams { vertices: vec![0, 1], edges: vec![(0, 7, 1.0)], root: 0 };
        assert!(MetricTree::new(unknown).is_err());
        let dup = TreeParams { vertices: vec![0, 0], edges: vec![(0, 0, 1.0)], root: 0 };
        assert!(MetricTree::new(dup).is_err());
    }

    #[test]
    fn comb_vertex_counts_match_enumeration() {
        // Independent count: base contributes grid + 1 vertices, every
        // non-final tooth `grid` more, every final tooth one tip.
        fn expected(depth: usize, grid: usize) -> usize {
            if depth == 0 {
                return 2;
            }
            let mut teeth = grid + 1;
            let mut count = grid + 1;
            for generation in 1..=depth {
                if generation == depth {
                    count += teeth;
                } else {
                    count += teeth * grid;
                    teeth *= grid;
                }
            }
            count
        }
        for depth in 0..=3 {
            for grid in [1, 2, 3, 4] {
                let params = comb_params(depth, grid).unwrap();
                let tree = MetricTree::new(params).unwrap();
                assert_eq!(tree.vertex_count(), expected(depth, grid), "depth {depth} grid {grid}");
            }
        }
        assert_eq!(MetricTree::new(comb_params(1, 2).unwrap()).unwrap().vertex_count(), 6);
        assert_eq!(MetricTree::new(comb_params(1, 1).unwrap()).unwrap().vertex_count(), 4);
    }

    #[test]
    fn comb_caps() {
        assert!(matches!(comb_params(4, 2), Err(Error::CapExceeded { what: "depth", .. })));
        assert!(matches!(comb_params(1, 17), Err(Error::CapExceeded { what: "grid", .. })));
        assert!(comb_params(3, 16).is_ok());
    }

    #[test]
    fn ball_pieces_on_a_star() {
        let tree = MetricTree::new(star_params(&[1.0, 1.0, 1.0])).unwrap();
        let pieces = tree.ball_pieces(&Point::on_edge(0, 0.5), 0.7);
        let total: f64 = pieces.iter().map(|(_, a, b)| b - a).sum();
        // 0.5 + 0.5 back to the leaf side on leg 0 (clipped at 1.0), plus 0.2 on each other leg.
        assert!((total - (0.5 + 0.5 + 0.2 + 0.2)).abs() < 1e-12, "{pieces:?}");
    }
}
