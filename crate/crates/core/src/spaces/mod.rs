//! Concrete CAT(0) spaces: Euclidean space, finite metric trees and open books.

pub(crate) mod book;
mod descriptor;
pub mod tree;

use std::sync::Arc;

use rand::Rng;

pub use descriptor::SpaceDescriptor;
pub use tree::{comb_params, star_params, MetricTree, TreeParams};

use crate::error::{check_unit_interval, Error, Result};
use crate::geometry::{euclid, Geodesic, Piece, Point};
use crate::tolerances;

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceKind {
    Euclidean,
    Tree(Arc<MetricTree>),
    OpenBook { pages: usize },
}

/// An immutable handle to a geodesic metric space.
#[derive(Debug, Clone, PartialEq)]
pub struct Space {
    kind: SpaceKind,
    dim: usize,
}

impl Space {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ParamOutOfRange { name: "dim", value: 0.0 });
        }
        Ok(Self { kind: SpaceKind::Euclidean, dim })
    }

    pub fn tree(params: TreeParams) -> Result<Self> {
        Ok(Self { kind: SpaceKind::Tree(Arc::new(MetricTree::new(params)?)), dim: 1 })
    }

    /// A star with one leg per entry of `legs`; leg `i` is edge `i`.
    pub fn star(legs: &[f64]) -> Result<Self> {
        Self::tree(star_params(legs))
    }

    /// Three unit legs.
    pub fn tripod() -> Self {
        Self::star(&[1.0; 3]).expect("unit tripod is a valid tree")
    }

    pub fn comb(depth: usize, grid: usize) -> Result<Self> {
        Self::tree(comb_params(depth, grid)?)
    }

    pub fn open_book(pages: usize) -> Result<Self> {
        if pages < 2 {
            return Err(Error::ParamOutOfRange { name: "pages", value: pages as f64 });
        }
        Ok(Self { kind: SpaceKind::OpenBook { pages }, dim: 2 })
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    /// Declared dimension: `d` for Euclidean space, 1 for trees, 2 for books.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_tree(&self) -> Option<&MetricTree> {
        match &self.kind {
            SpaceKind::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn validate(&self, p: &Point) -> Result<()> {
        match &self.kind {
            SpaceKind::Euclidean => {
                if p.chart != 0 {
                    return Err(Error::InvalidPoint(format!("Euclidean chart must be 0, got {}", p.chart)));
                }
                if p.coords.len() != self.dim {
                    return Err(Error::InvalidPoint(format!(
                        "expected {} coordinates, got {}",
                        self.dim,
                        p.coords.len()
                    )));
                }
                if p.coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
                Ok(())
            }
            SpaceKind::Tree(t) => t.validate(p),
            SpaceKind::OpenBook { pages } => book::validate(*pages, p),
        }
    }

    /// Canonical representation: boundary points move to the lowest chart id.
    pub fn normalize(&self, p: &Point) -> Result<Point> {
        self.validate(p)?;
        Ok(match &self.kind {
            SpaceKind::Euclidean => p.clone(),
            SpaceKind::Tree(t) => t.normalize(p),
            SpaceKind::OpenBook { .. } => book::normalize(p),
        })
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.validate(p)?;
        self.validate(q)?;
        Ok(self.distance_unchecked(p, q))
    }

    pub(crate) fn distance_unchecked(&self, p: &Point, q: &Point) -> f64 {
        match &self.kind {
            SpaceKind::Euclidean => euclid(&p.coords, &q.coords),
            SpaceKind::Tree(t) => t.distance(p, q),
            SpaceKind::OpenBook { .. } => book::distance(p, q),
        }
    }

    /// Equality after normalization, up to the metric tolerance.
    pub fn same_point(&self, p: &Point, q: &Point) -> bool {
        self.distance_unchecked(p, q) <= tolerances::METRIC
    }

    pub fn geodesic(&self, p: &Point, q: &Point) -> Result<Geodesic> {
        let (p, q) = (self.normalize(p)?, self.normalize(q)?);
        let pieces = match &self.kind {
            SpaceKind::Euclidean => vec![Piece::new(0, p.coords.clone(), q.coords.clone())],
            SpaceKind::Tree(t) => t.geodesic_pieces(&p, &q),
            SpaceKind::OpenBook { .. } => book::geodesic_pieces(&p, &q),
        };
        Ok(Geodesic::from_pieces(p, q, pieces))
    }

    /// The point `x_t` at parameter `t` on the geodesic from `p` to `q`.
    pub fn convex_combination(&self, p: &Point, q: &Point, t: f64) -> Result<Point> {
        check_unit_interval("t", t)?;
        let x = self.geodesic(p, q)?.eval(t);
        self.normalize(&x)
    }

    /// A random point. Euclidean points are uniform in `[-scale, scale]^d`, book
    /// points pick a page uniformly and `(u, v)` uniform in
    /// `[0, scale] × [-scale, scale]`, tree points are uniform by length.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> Point {
        match &self.kind {
            SpaceKind::Euclidean => {
                Point::euclidean((0..self.dim).map(|_| rng.random_range(-scale..=scale)).collect::<Vec<_>>())
            }
            SpaceKind::Tree(t) => {
                let mut r = rng.random_range(0.0..t.total_length());
                for (e, edge) in t.edges().iter().enumerate() {
                    if r < edge.length {
                        return Point::on_edge(e, r);
                    }
                    r -= edge.length;
                }
                let last = t.edges().len() - 1;
                Point::on_edge(last, t.edges()[last].length)
            }
            SpaceKind::OpenBook { pages } => {
                let page = rng.random_range(0..*pages);
                Point::page(page, rng.random_range(0.0..=scale), rng.random_range(-scale..=scale))
            }
        }
    }

    pub fn descriptor(&self) -> SpaceDescriptor {
        match &self.kind {
            SpaceKind::Euclidean => SpaceDescriptor::Euclidean { dim: self.dim },
            SpaceKind::Tree(t) => {
                let p = t.params().clone();
                SpaceDescriptor::Tree { vertices: p.vertices, edges: p.edges, root: p.root }
            }
            SpaceKind::OpenBook { pages } => SpaceDescriptor::OpenBook { pages: *pages },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let e2 = Space::euclidean(2).unwrap();
        let d = e2.distance(&Point::euclidean(vec![0.0, 0.0]), &Point::euclidean(vec![3.0, 4.0])).unwrap();
        assert_eq!(d, 5.0);

        let tri = Space::tripod();
        let d = tri.distance(&Point::on_edge(0, 0.4), &Point::on_edge(1, 0.7)).unwrap();
        assert!((d - 1.1).abs() < 1e-12);

        let book = Space::open_book(3).unwrap();
        let d = book.distance(&Point::page(0, 1.0, 0.0), &Point::page(1, 1.0, 0.0)).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejected_constructions() {
        assert!(Space::euclidean(0).is_err());
        assert!(Space::open_book(1).is_err());
        assert!(Space::comb(4, 2).is_err());
    }

    #[test]
    fn invalid_points() {
        let book = Space::open_book(3).unwrap();
        assert!(matches!(book.distance(&Point::page(0, -0.5, 0.0), &Point::page(1, 1.0, 0.0)), Err(Error::InvalidPoint(_))));
        assert!(book.validate(&Point::page(3, 1.0, 0.0)).is_err());
        let tri = Space::tripod();
        assert!(tri.validate(&Point::on_edge(0, 1.5)).is_err());
        assert!(tri.validate(&Point::on_edge(5, 0.5)).is_err());
        let e2 = Space::euclidean(2).unwrap();
        assert!(e2.validate(&Point::euclidean(vec![1.0])).is_err());
    }

    #[test]
    fn normalization_picks_lowest_chart() {
        let book = Space::open_book(3).unwrap();
        assert_eq!(book.normalize(&Point::page(2, 0.0, 1.5)).unwrap(), Point::page(0, 0.0, 1.5));
        let tri = Space::tripod();
        // The center is vertex 0, shared by all three legs.
        assert_eq!(tri.normalize(&Point::on_edge(2, 0.0)).unwrap(), Point::on_edge(0, 0.0));
    }

    #[test]
    fn geodesic_examples() {
        let e2 = Space::euclidean(2).unwrap();
        let g = e2.geodesic(&Point::euclidean(vec![0.0, 0.0]), &Point::euclidean(vec![2.0, 0.0])).unwrap();
        assert_eq!(g.eval(0.25).coords, vec![0.5, 0.0]);

        let book = Space::open_book(3).unwrap();
        let g = book.geodesic(&Point::page(0, 1.0, 0.0), &Point::page(1, 1.0, 0.0)).unwrap();
        let mid = book.normalize(&g.eval(0.5)).unwrap();
        assert_eq!(mid, Point::page(0, 0.0, 0.0));
        assert_eq!(g.breakpoints().len(), 1);

        let tri = Space::tripod();
        let g = tri.geodesic(&Point::on_edge(0, 0.4), &Point::on_edge(1, 0.7)).unwrap();
        let p = g.at_arc_length(0.55);
        assert_eq!(p.chart, 1);
        assert!((p.coords[0] - 0.15).abs() < 1e-12);
    }

    #[test]
    fn two_page_book_is_a_plane() {
        let book = Space::open_book(2).unwrap();
        let d = book.distance(&Point::page(0, 1.0, 0.0), &Point::page(1, 1.0, 3.0)).unwrap();
        assert!((d - 13f64.sqrt()).abs() < 1e-12);
        let d = Space::open_book(3).unwrap().distance(&Point::page(1, 1.0, 0.0), &Point::page(1, 2.0, 0.0)).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn convex_combination_endpoints() {
        let book = Space::open_book(3).unwrap();
        let (p, q) = (Point::page(0, 1.0, 0.0), Point::page(1, 1.0, 0.0));
        assert_eq!(book.convex_combination(&p, &q, 0.0).unwrap(), p);
        assert_eq!(book.convex_combination(&p, &q, 1.0).unwrap(), q);
        assert_eq!(book.convex_combination(&p, &q, 0.5).unwrap(), Point::page(0, 0.0, 0.0));
        assert!(matches!(book.convex_combination(&p, &q, 1.5), Err(Error::ParamOutOfRange { .. })));
    }
}
