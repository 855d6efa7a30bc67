use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::spaces::Space;
use crate::tolerances;

/// A finitely supported probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Validates and normalizes the support points.
    pub fn new(space: &Space, points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        let m = Self { points, weights };
        m.validated(space)
    }

    /// Equal weights `1/n`.
    pub fn uniform(space: &Space, points: Vec<Point>) -> Result<Self> {
        let n = points.len();
        Self::new(space, points, vec![1.0 / n as f64; n])
    }

    pub fn dirac(space: &Space, point: Point) -> Result<Self> {
        Self::new(space, vec![point], vec![1.0])
    }

    /// Checks the measure invariants against `space` and returns the measure
    /// with normalized points.
    pub fn validated(self, space: &Space) -> Result<Self> {
        if self.points.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        if self.points.len() != self.weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points but {} weights",
                self.points.len(),
                self.weights.len()
            )));
        }
        if let Some(w) = self.weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidMeasure(format!("weight {w} is not positive")));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > tolerances::WEIGHT_SUM {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        let points = self.points.iter().map(|p| space.normalize(p)).collect::<Result<Vec<_>>>()?;
        for (i, p) in points.iter().enumerate() {
            if let Some(k) = points[..i].iter().position(|q| space.same_point(p, q)) {
                return Err(Error::InvalidMeasure(format!("atoms {k} and {i} coincide")));
            }
        }
        Ok(Self { points, weights: self.weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Index of the atom at `p`, if any.
    pub fn find(&self, space: &Space, p: &Point) -> Option<usize> {
        self.points.iter().position(|q| space.same_point(p, q))
    }

    /// The same measure with atoms listed in the order `perm` (`new[k] = old[perm[k]]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            points: perm.iter().map(|&k| self.points[k].clone()).collect(),
            weights: perm.iter().map(|&k| self.weights[k]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_measures() {
        let e1 = Space::euclidean(1).unwrap();
        let p = |x: f64| Point::euclidean(vec![x]);
        assert!(DiscreteMeasure::new(&e1, vec![p(0.0), p(1.0)], vec![0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::new(&e1, vec![p(0.0), p(1.0)], vec![1.0, 0.0]).is_err());
        assert!(DiscreteMeasure::new(&e1, vec![p(0.0), p(0.0)], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::new(&e1, vec![p(0.0)], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::new(&e1, vec![], vec![]).is_err());
        assert!(DiscreteMeasure::uniform(&e1, vec![p(0.0), p(1.0), p(2.0)]).is_ok());
    }

    #[test]
    fn spine_duplicates_are_detected() {
        let book = Space::open_book(3).unwrap();
        let r = DiscreteMeasure::uniform(&book, vec![Point::page(1, 0.0, 0.5), Point::page(2, 0.0, 0.5)]);
        assert!(r.is_err());
    }

    #[test]
    fn json_layout() {
        let e1 = Space::euclidean(1).unwrap();
        let m = DiscreteMeasure::uniform(&e1, vec![Point::euclidean(vec![0.0]), Point::euclidean(vec![1.0])]).unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"points":[[0,0.0],[0,1.0]],"weights":[0.5,0.5]}"#);
    }
}
