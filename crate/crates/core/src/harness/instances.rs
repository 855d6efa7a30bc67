//! Random instances shared by the experiments.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::Result;
use crate::geometry::Point;
use crate::spaces::{MetricTree, Space};
use crate::transport::DiscreteMeasure;

/// `n` pairwise distinct random points (see [`Space::sample_point`]).
pub fn distinct_points<R: Rng + ?Sized>(space: &Space, rng: &mut R, n: usize, scale: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(n);
    while out.len() < n {
        let p = space.sample_point(rng, scale);
        if !out.iter().any(|q| space.same_point(&p, q)) {
            out.push(p);
        }
    }
    out
}

/// Equal-weight measure on `n` random atoms.
pub fn uniform_measure<R: Rng + ?Sized>(space: &Space, rng: &mut R, n: usize, scale: f64) -> Result<DiscreteMeasure> {
    DiscreteMeasure::uniform(space, distinct_points(space, rng, n, scale))
}

/// A pair of equal-weight measures on `n` atoms each.
pub fn measure_pair<R: Rng + ?Sized>(
    space: &Space,
    rng: &mut R,
    n: usize,
    scale: f64,
) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    Ok((uniform_measure(space, rng, n, scale)?, uniform_measure(space, rng, n, scale)?))
}

/// Uniform random permutation of `0..n`.
pub fn permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

/// A connected set of at most `size` edges grown from a random edge.
pub fn connected_edges<R: Rng + ?Sized>(tree: &MetricTree, rng: &mut R, size: usize) -> Vec<usize> {
    let mut edges = vec![rng.random_range(0..tree.edges().len())];
    while edges.len() < size {
        let mut frontier: Vec<usize> = edges
            .iter()
            .flat_map(|&e| [tree.edges()[e].a, tree.edges()[e].b])
            .flat_map(|v| tree.incident(v).iter().copied())
            .filter(|e| !edges.contains(e))
            .collect();
        frontier.sort_unstable();
        frontier.dedup();
        match frontier.choose(rng) {
            Some(&e) => edges.push(e),
            None => break,
        }
    }
    edges.sort_unstable();
    edges
}

/// The point on `edge` at distance `t` from its endpoint `v`.
pub fn point_from_vertex(tree: &MetricTree, edge: usize, v: usize, t: f64) -> Point {
    let e = &tree.edges()[edge];
    if e.coord_of(v) == 0.0 {
        Point::on_edge(edge, t)
    } else {
        Point::on_edge(edge, e.length - t)
    }
}
