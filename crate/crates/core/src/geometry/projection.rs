use std::collections::{BTreeSet, VecDeque};

use super::{euclid, Geodesic, Point};
use crate::error::{Error, Result};
use crate::spaces::{Space, SpaceKind};

/// Convex sets with a finite description.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    /// The geodesic segment between two points.
    Segment(Point, Point),
    /// Closed ball `B[center, radius]`.
    Ball { center: Point, radius: f64 },
    /// Union of whole edges of a tree; must be connected.
    Subtree { edges: Vec<usize> },
}

/// Closest point of `set` to `x`.
pub fn project_convex(space: &Space, x: &Point, set: &ConvexSet) -> Result<Point> {
    let x = space.normalize(x)?;
    match set {
        ConvexSet::Segment(a, b) => {
            let g = space.geodesic(a, b)?;
            if g.length() == 0.0 {
                return Ok(g.start().clone());
            }
            let p = match space.kind() {
                SpaceKind::Euclidean => project_flat(&x.coords, &g.pieces()[0].from, &g.pieces()[0].to),
                SpaceKind::OpenBook { .. } => return space.normalize(&project_book_segment(&x, &g)),
                SpaceKind::Tree(_) => return project_tree_segment(space, &x, &g),
            };
            Ok(Point::euclidean(p))
        }
        ConvexSet::Ball { center, radius } => {
            if !(*radius >= 0.0) {
                return Err(Error::UnsupportedConvexSet(format!("ball radius {radius}")));
            }
            let d = space.distance(center, &x)?;
            if d <= *radius {
                Ok(x)
            } else {
                space.convex_combination(center, &x, radius / d)
            }
        }
        ConvexSet::Subtree { edges } => project_subtree(space, &x, edges),
    }
}

fn project_flat(x: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let ab: Vec<f64> = a.iter().zip(b).map(|(a, b)| b - a).collect();
    let len2: f64 = ab.iter().map(|c| c * c).sum();
    let dot: f64 = x.iter().zip(a).zip(&ab).map(|((x, a), d)| (x - a) * d).sum();
    let t = (dot / len2).clamp(0.0, 1.0);
    a.iter().zip(&ab).map(|(a, d)| a + t * d).collect()
}

// Each piece lies in one page. A point on another page is at Euclidean
// distance from the piece once reflected across the spine.
fn project_book_segment(x: &Point, g: &Geodesic) -> Point {
    let (u, v) = (x.coords[0], x.coords[1]);
    let mut best: Option<(f64, Point)> = None;
    for piece in g.pieces() {
        let seen = if piece.chart == x.chart { [u, v] } else { [-u, v] };
        let p = project_flat(&seen, &piece.from, &piece.to);
        let d = euclid(&seen, &p);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, Point::new(piece.chart, p)));
        }
    }
    best.expect("non-degenerate geodesic has a piece").1
}

// The gate of `x` onto a tree path is a piece endpoint, or the clamp of `x`
// when it lies on an edge the path runs along.
fn project_tree_segment(space: &Space, x: &Point, g: &Geodesic) -> Result<Point> {
    let mut candidates = Vec::new();
    for piece in g.pieces() {
        candidates.push(Point::new(piece.chart, piece.from.clone()));
        candidates.push(Point::new(piece.chart, piece.to.clone()));
        if piece.chart == x.chart {
            let (lo, hi) = (piece.from[0].min(piece.to[0]), piece.from[0].max(piece.to[0]));
            candidates.push(Point::on_edge(piece.chart, x.coords[0].clamp(lo, hi)));
        }
    }
    let best = candidates
        .into_iter()
        .map(|c| (space.distance_unchecked(x, &c), c))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-degenerate geodesic has a piece")
        .1;
    space.normalize(&best)
}

fn project_subtree(space: &Space, x: &Point, edges: &[usize]) -> Result<Point> {
    let tree = space
        .as_tree()
        .ok_or_else(|| Error::UnsupportedConvexSet("subtrees exist only in trees".into()))?;
    let set: BTreeSet<usize> = edges.iter().copied().collect();
    if set.is_empty() {
        return Err(Error::UnsupportedConvexSet("empty subtree".into()));
    }
    if let Some(&e) = set.iter().find(|&&e| e >= tree.edges().len()) {
        return Err(Error::UnsupportedConvexSet(format!("edge {e} does not exist")));
    }
    // Connectivity: flood through shared vertices.
    let first = *set.iter().next().unwrap();
    let mut seen = BTreeSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some(e) = queue.pop_front() {
        let edge = tree.edges()[e];
        for v in [edge.a, edge.b] {
            for &f in tree.incident(v) {
                if set.contains(&f) && seen.insert(f) {
                    queue.push_back(f);
                }
            }
        }
    }
    if seen.len() != set.len() {
        return Err(Error::UnsupportedConvexSet("subtree edges are not connected".into()));
    }
    if set.contains(&x.chart) {
        return Ok(x.clone());
    }
    if let Some(v) = tree.vertex_of(x) {
        if tree.incident(v).iter().any(|e| set.contains(e)) {
            return Ok(x.clone());
        }
    }
    let gate = set
        .iter()
        .flat_map(|&e| {
            let edge = tree.edges()[e];
            [edge.a, edge.b]
        })
        .map(|v| {
            let p = tree.vertex_point(v);
            (space.distance_unchecked(x, &p), p)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty subtree")
        .1;
    Ok(gate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_segment_foot() {
        let e2 = Space::euclidean(2).unwrap();
        let set = ConvexSet::Segment(Point::euclidean(vec![0.0, 0.0]), Point::euclidean(vec![2.0, 0.0]));
        let p = project_convex(&e2, &Point::euclidean(vec![0.0, 1.0]), &set).unwrap();
        assert_eq!(p, Point::euclidean(vec![0.0, 0.0]));
    }

    #[test]
    fn tripod_leg_projects_to_center() {
        let tri = Space::tripod();
        let p = project_convex(&tri, &Point::on_edge(0, 0.5), &ConvexSet::Subtree { edges: vec![1] }).unwrap();
        assert!(tri.same_point(&p, &Point::on_edge(1, 0.0)));
        let seg = ConvexSet::Segment(Point::on_edge(1, 0.0), Point::on_edge(1, 1.0));
        let p = project_convex(&tri, &Point::on_edge(0, 0.5), &seg).unwrap();
        assert!(tri.same_point(&p, &Point::on_edge(1, 0.0)));
    }

    #[test]
    fn subtree_validation() {
        let tri = Space::tripod();
        let x = Point::on_edge(0, 0.5);
        assert!(project_convex(&tri, &x, &ConvexSet::Subtree { edges: vec![] }).is_err());
        assert!(project_convex(&tri, &x, &ConvexSet::Subtree { edges: vec![9] }).is_err());
        let e2 = Space::euclidean(2).unwrap();
        assert!(matches!(
            project_convex(&e2, &Point::euclidean(vec![0.0, 0.0]), &ConvexSet::Subtree { edges: vec![0] }),
            Err(Error::UnsupportedConvexSet(_))
        ));
        let comb = Space::comb(1, 2).unwrap();
        // Two teeth hanging off different base vertices, without the base between them.
        let t = comb.as_tree().unwrap();
        let teeth: Vec<usize> = (0..t.edges().len()).filter(|&e| t.edges()[e].length == 1.0).collect();
        let set = ConvexSet::Subtree { edges: vec![teeth[0], teeth[2]] };
        assert!(project_convex(&comb, &Point::on_edge(0, 0.1), &set).is_err());
    }

    #[test]
    fn book_segment_across_pages() {
        let book = Space::open_book(3).unwrap();
        let set = ConvexSet::Segment(Point::page(0, 1.0, -1.0), Point::page(0, 1.0, 1.0));
        // x on page 2 is closest to the segment through the spine.
        let p = project_convex(&book, &Point::page(2, 0.5, 0.25), &set).unwrap();
        assert_eq!(p, Point::page(0, 1.0, 0.25));
    }

    #[test]
    fn points_inside_are_fixed() {
        let book = Space::open_book(3).unwrap();
        let x = Point::page(1, 0.3, 0.2);
        let ball = ConvexSet::Ball { center: Point::page(2, 0.1, 0.0), radius: 1.0 };
        assert_eq!(project_convex(&book, &x, &ball).unwrap(), x);
    }
}
