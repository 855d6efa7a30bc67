use serde::{Deserialize, Serialize};

use super::DiscreteMeasure;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::spaces::Space;
use crate::tolerances;

/// A coupling of two discrete measures, stored as its positive entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// `(source index, target index, mass)`, sorted by index pair.
    pub entries: Vec<(usize, usize, f64)>,
    pub source: DiscreteMeasure,
    pub target: DiscreteMeasure,
}

#[derive(Serialize, Deserialize)]
struct PlanDocument {
    entries: Vec<(usize, usize, f64)>,
}

impl TransportPlan {
    pub fn new(entries: Vec<(usize, usize, f64)>, source: DiscreteMeasure, target: DiscreteMeasure) -> Result<Self> {
        for &(i, j, mass) in &entries {
            if i >= source.len() || j >= target.len() {
                return Err(Error::InvalidMeasure(format!("plan entry ({i}, {j}) out of range")));
            }
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(Error::InvalidMeasure(format!("plan entry ({i}, {j}) has mass {mass}")));
            }
        }
        let mut entries = entries;
        entries.sort_by_key(|e| (e.0, e.1));
        Ok(Self { entries, source, target })
    }

    /// Largest deviation of a row or column sum from its marginal weight.
    pub fn marginal_error(&self) -> f64 {
        let mut rows = vec![0.0; self.source.len()];
        let mut cols = vec![0.0; self.target.len()];
        for &(i, j, f) in &self.entries {
            rows[i] += f;
            cols[j] += f;
        }
        let r = rows.iter().zip(&self.source.weights).map(|(a, b)| (a - b).abs());
        let c = cols.iter().zip(&self.target.weights).map(|(a, b)| (a - b).abs());
        r.chain(c).fold(0.0, f64::max)
    }

    pub fn is_feasible(&self) -> bool {
        self.marginal_error() <= tolerances::MARGINAL
    }

    /// `Σ c(x_i, y_j) π_ij`.
    pub fn cost(&self, space: &Space) -> Result<f64> {
        let mut total = 0.0;
        for &(i, j, f) in &self.entries {
            let d = space.distance(&self.source.points[i], &self.target.points[j])?;
            total += 0.5 * d * d * f;
        }
        Ok(total)
    }

    /// `{"entries": [[i, j, mass], ...]}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PlanDocument { entries: self.entries.clone() })?)
    }

    pub fn from_json(text: &str, source: DiscreteMeasure, target: DiscreteMeasure) -> Result<Self> {
        let doc: PlanDocument = serde_json::from_str(text)?;
        Self::new(doc.entries, source, target)
    }

    /// Rows `i,j,mass` under a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,mass\n");
        for &(i, j, f) in &self.entries {
            out.push_str(&format!("{i},{j},{f}\n"));
        }
        out
    }
}

/// A deterministic assignment: `images[i]` is the image of source atom `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransportMap {
    pub images: Vec<Point>,
}

impl TransportMap {
    pub fn new(images: Vec<Point>) -> Self {
        Self { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image(&self, i: usize) -> Result<&Point> {
        self.images
            .get(i)
            .ok_or_else(|| Error::MapUndefined(format!("no image for atom {i} (map has {})", self.images.len())))
    }

    /// Whether `T_# source = target`: images land on target atoms and carry
    /// their weights within the marginal tolerance.
    pub fn pushes_forward(&self, space: &Space, source: &DiscreteMeasure, target: &DiscreteMeasure) -> Result<bool> {
        if self.images.len() != source.len() {
            return Err(Error::MapUndefined(format!(
                "map has {} images for {} atoms",
                self.images.len(),
                source.len()
            )));
        }
        let mut mass = vec![0.0; target.len()];
        for (img, w) in self.images.iter().zip(&source.weights) {
            match target.find(space, img) {
                Some(j) => mass[j] += w,
                None => return Ok(false),
            }
        }
        Ok(mass.iter().zip(&target.weights).all(|(a, b)| (a - b).abs() <= tolerances::MARGINAL))
    }
}

/// Dual potentials: `ψ` on the source support, `φ` on the target support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialPair {
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub feasible: bool,
    /// Largest of the feasibility violation `φ − ψ − c` over all pairs and of
    /// `|φ − ψ − c|` over the plan support.
    pub slack_max: f64,
}

impl PotentialPair {
    /// Computes feasibility and slack of `(ψ, φ)` against `plan`.
    pub fn assess(space: &Space, psi: Vec<f64>, phi: Vec<f64>, plan: &TransportPlan) -> Result<Self> {
        let (src, tgt) = (&plan.source, &plan.target);
        let mut slack_max: f64 = 0.0;
        for (i, x) in src.points.iter().enumerate() {
            for (j, y) in tgt.points.iter().enumerate() {
                let d = space.distance_unchecked(x, y);
                slack_max = slack_max.max(phi[j] - psi[i] - 0.5 * d * d);
            }
        }
        for &(i, j, _) in &plan.entries {
            let d = space.distance_unchecked(&src.points[i], &tgt.points[j]);
            slack_max = slack_max.max((phi[j] - psi[i] - 0.5 * d * d).abs());
        }
        Ok(Self { psi, phi, feasible: slack_max <= tolerances::MARGINAL, slack_max })
    }

    /// `Σ φ ν − Σ ψ μ`.
    pub fn dual_objective(&self, source: &DiscreteMeasure, target: &DiscreteMeasure) -> f64 {
        let a: f64 = self.phi.iter().zip(&target.weights).map(|(p, w)| p * w).sum();
        let b: f64 = self.psi.iter().zip(&source.weights).map(|(p, w)| p * w).sum();
        a - b
    }
}

/// Result of reading a map off a plan.
#[derive(Debug, Clone, PartialEq)]
pub enum MongeOutcome {
    Map {
        map: TransportMap,
        /// Target index chosen for every source atom.
        assignment: Vec<usize>,
        split_mass: f64,
    },
    NotDeterministic {
        split_mass: f64,
    },
}

impl MongeOutcome {
    pub fn split_mass(&self) -> f64 {
        match self {
            MongeOutcome::Map { split_mass, .. } | MongeOutcome::NotDeterministic { split_mass } => *split_mass,
        }
    }

    pub fn into_map(self) -> Option<(TransportMap, Vec<usize>)> {
        match self {
            MongeOutcome::Map { map, assignment, .. } => Some((map, assignment)),
            MongeOutcome::NotDeterministic { .. } => None,
        }
    }
}

/// Sends every source atom to its largest plan entry, provided no atom puts
/// more than `tol` of its mass elsewhere.
pub fn extract_monge_map(plan: &TransportPlan, tol: f64) -> MongeOutcome {
    let n = plan.source.len();
    let mut best: Vec<Option<(usize, f64)>> = vec![None; n];
    let mut row = vec![0.0; n];
    for &(i, j, f) in &plan.entries {
        row[i] += f;
        if best[i].is_none_or(|(_, g)| f > g) {
            best[i] = Some((j, f));
        }
    }
    let mut split_mass = 0.0;
    let mut deterministic = true;
    for i in 0..n {
        let off = match best[i] {
            Some((_, f)) => (row[i] - f).max(0.0),
            None => plan.source.weights[i],
        };
        if off > tol || best[i].is_none() {
            deterministic = false;
        }
        split_mass += off;
    }
    if !deterministic {
        return MongeOutcome::NotDeterministic { split_mass };
    }
    let assignment: Vec<usize> = best.iter().map(|b| b.expect("checked above").0).collect();
    let images = assignment.iter().map(|&j| plan.target.points[j].clone()).collect();
    MongeOutcome::Map { map: TransportMap::new(images), assignment, split_mass }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> DiscreteMeasure {
        let e1 = Space::euclidean(1).unwrap();
        DiscreteMeasure::uniform(&e1, xs.iter().map(|&x| Point::euclidean(vec![x])).collect()).unwrap()
    }

    #[test]
    fn permutation_plan_is_a_map() {
        let plan = TransportPlan::new(vec![(1, 0, 0.5), (0, 1, 0.5)], line(&[0.0, 1.0]), line(&[2.0, 3.0])).unwrap();
        let MongeOutcome::Map { assignment, split_mass, .. } = extract_monge_map(&plan, 1e-12) else {
            panic!("expected a map")
        };
        assert_eq!(assignment, vec![1, 0]);
        assert_eq!(split_mass, 0.0);
    }

    #[test]
    fn split_atom_is_not_deterministic() {
        let e1 = Space::euclidean(1).unwrap();
        let mu = line(&[0.0, 1.0]);
        let nu = DiscreteMeasure::new(
            &e1,
            vec![Point::euclidean(vec![2.0]), Point::euclidean(vec![3.0]), Point::euclidean(vec![4.0])],
            vec![0.25, 0.25, 0.5],
        )
        .unwrap();
        let plan = TransportPlan::new(vec![(0, 0, 0.25), (0, 1, 0.25), (1, 2, 0.5)], mu, nu).unwrap();
        assert!(plan.is_feasible());
        match extract_monge_map(&plan, 1e-12) {
            MongeOutcome::NotDeterministic { split_mass } => assert_eq!(split_mass, 0.25),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plan_formats() {
        let plan = TransportPlan::new(vec![(0, 0, 0.5), (1, 1, 0.5)], line(&[0.0, 1.0]), line(&[2.0, 3.0])).unwrap();
        assert_eq!(plan.to_json().unwrap(), r#"{"entries":[[0,0,0.5],[1,1,0.5]]}"#);
        assert_eq!(plan.to_csv(), "i,j,mass\n0,0,0.5\n1,1,0.5\n");
        let back = TransportPlan::from_json(&plan.to_json().unwrap(), plan.source.clone(), plan.target.clone()).unwrap();
        assert_eq!(back, plan);
        assert!(TransportPlan::new(vec![(5, 0, 0.5)], line(&[0.0]), line(&[1.0])).is_err());
    }
}
