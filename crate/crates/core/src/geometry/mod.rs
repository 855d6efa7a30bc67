//! Space-agnostic comparison geometry.
//!
//! Points live in charts (the single Euclidean chart, a tree edge, or a book
//! page) and geodesics are stored as a chain of straight pieces, one per chart
//! they cross. Inside a chart the coordinates are isometric to a convex subset
//! of Euclidean space, so linear interpolation of chart coordinates traces the
//! geodesic at constant speed.

mod angle;
mod extension;
mod projection;

pub use angle::{
    alexandrov_angle, cat0_defect, comparison_angle, comparison_angles, default_angle_schedule, AngleEstimate,
};
pub use extension::extend;
pub use projection::{project_convex, ConvexSet};

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A point of a space, given by a chart identifier and coordinates in that chart.
///
/// * Euclidean space has one chart (`0`) with `dim` coordinates.
/// * A tree point lives on edge `chart` at arc-length `coords[0]` from the
///   edge's first vertex.
/// * A book point lives on page `chart` with coordinates `(u, v)`, `u >= 0`.
///
/// Boundary points (tree vertices, the spine `u = 0`) have several valid
/// representations; [`crate::Space::normalize`] picks the canonical one.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub chart: usize,
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(chart: usize, coords: impl Into<Vec<f64>>) -> Self {
        Self { chart, coords: coords.into() }
    }

    pub fn euclidean(coords: impl Into<Vec<f64>>) -> Self {
        Self::new(0, coords)
    }

    pub fn on_edge(edge: usize, s: f64) -> Self {
        Self::new(edge, vec![s])
    }

    pub fn page(page: usize, u: f64, v: f64) -> Self {
        Self::new(page, vec![u, v])
    }
}

// Serialized as a flat array `[chart, c0, c1, ...]`.
impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coords.len() + 1))?;
        seq.serialize_element(&self.chart)?;
        for c in &self.coords {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PointVisitor;

        impl<'de> Visitor<'de> for PointVisitor {
            type Value = Point;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an array [chart, coords...]")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Point, A::Error> {
                let chart: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                if chart < 0.0 || chart.fract() != 0.0 {
                    return Err(de::Error::custom(format!("chart must be a non-negative integer, got {chart}")));
                }
                let mut coords = Vec::new();
                while let Some(c) = seq.next_element::<f64>()? {
                    coords.push(c);
                }
                Ok(Point::new(chart as usize, coords))
            }
        }

        deserializer.deserialize_seq(PointVisitor)
    }
}

/// A straight run of a geodesic inside one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub chart: usize,
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    /// Arc-length of the geodesic at the start of this piece.
    pub offset: f64,
    pub length: f64,
}

impl Piece {
    pub(crate) fn new(chart: usize, from: Vec<f64>, to: Vec<f64>) -> Self {
        let length = euclid(&from, &to);
        Self { chart, from, to, offset: 0.0, length }
    }

    fn at(&self, tau: f64) -> Vec<f64> {
        self.from.iter().zip(&self.to).map(|(a, b)| a + tau * (b - a)).collect()
    }

    /// Unit direction of travel in chart coordinates.
    pub fn direction(&self) -> Vec<f64> {
        self.from.iter().zip(&self.to).map(|(a, b)| (b - a) / self.length).collect()
    }
}

/// A constant-speed geodesic `γ : [0, 1] → X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    start: Point,
    end: Point,
    length: f64,
    pieces: Vec<Piece>,
}

impl Geodesic {
    /// Builds a geodesic from consecutive pieces; zero-length pieces are dropped.
    pub(crate) fn from_pieces(start: Point, end: Point, pieces: Vec<Piece>) -> Self {
        let mut offset = 0.0;
        let pieces: Vec<Piece> = pieces
            .into_iter()
            .filter(|p| p.length > 0.0)
            .map(|mut p| {
                p.offset = offset;
                offset += p.length;
                p
            })
            .collect();
        Self { start, end, length: offset, pieces }
    }

    pub fn start(&self) -> &Point {
        &self.start
    }

    pub fn end(&self) -> &Point {
        &self.end
    }

    /// `ℓ(γ) = d(γ(0), γ(1))`.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// The point `γ(t)`. Parameters outside `[0, 1]` are clamped.
    pub fn eval(&self, t: f64) -> Point {
        if t <= 0.0 || self.pieces.is_empty() {
            return self.start.clone();
        }
        if t >= 1.0 {
            return self.end.clone();
        }
        self.at_arc_length(t * self.length)
    }

    /// The point at arc-length `s` from the start, clamped to `[0, ℓ]`.
    pub fn at_arc_length(&self, s: f64) -> Point {
        if s <= 0.0 || self.pieces.is_empty() {
            return self.start.clone();
        }
        if s >= self.length {
            return self.end.clone();
        }
        let idx = self
            .pieces
            .partition_point(|p| p.offset + p.length < s)
            .min(self.pieces.len() - 1);
        let piece = &self.pieces[idx];
        let tau = ((s - piece.offset) / piece.length).clamp(0.0, 1.0);
        Point::new(piece.chart, piece.at(tau))
    }

    /// Interior transition points (spine crossings, tree vertices) with their parameters.
    pub fn breakpoints(&self) -> Vec<(f64, Point)> {
        self.pieces
            .iter()
            .skip(1)
            .map(|p| (p.offset / self.length, Point::new(p.chart, p.from.clone())))
            .collect()
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> Geodesic {
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| Piece::new(p.chart, p.to.clone(), p.from.clone()))
            .collect();
        Geodesic::from_pieces(self.end.clone(), self.start.clone(), pieces)
    }

    /// Appends pieces at the end, moving the endpoint to `end`.
    pub(crate) fn append(&self, end: Point, extra: Vec<Piece>) -> Geodesic {
        let mut pieces = self.pieces.clone();
        pieces.extend(extra);
        Geodesic::from_pieces(self.start.clone(), end, pieces)
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_json_is_a_flat_array() {
        let p = Point::page(2, 0.5, -1.0);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, "[2,0.5,-1.0]");
        let back: Point = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Point>("[1.5, 0.0]").is_err());
        assert!(serde_json::from_str::<Point>("[]").is_err());
    }

    #[test]
    fn eval_hits_endpoints_exactly() {
        let g = Geodesic::from_pieces(
            Point::euclidean(vec![0.0, 0.0]),
            Point::euclidean(vec![2.0, 0.0]),
            vec![Piece::new(0, vec![0.0, 0.0], vec![2.0, 0.0])],
        );
        assert_eq!(g.eval(0.0), Point::euclidean(vec![0.0, 0.0]));
        assert_eq!(g.eval(1.0), Point::euclidean(vec![2.0, 0.0]));
        assert_eq!(g.eval(0.25).coords, vec![0.5, 0.0]);
        assert!(g.breakpoints().is_empty());
        let r = g.reversed();
        assert_eq!(r.eval(0.25).coords, vec![1.5, 0.0]);
    }
}
