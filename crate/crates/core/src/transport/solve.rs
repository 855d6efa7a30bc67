use itertools::Itertools;
use serde::Serialize;

use super::simplex::{self, PivotRule};
use super::{DiscreteMeasure, PotentialPair, TransportPlan};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::spaces::Space;
use crate::tolerances;

/// Largest support size accepted by [`solve_kantorovich`].
pub const MAX_SUPPORT: usize = 10_000;

/// Largest support size accepted by [`brute_force_oracle`].
pub const MAX_BRUTE_FORCE: usize = 8;

/// Cost matrices up to this many entries are cached; larger problems
/// recompute distances on demand.
const COST_CACHE_LIMIT: usize = 1 << 25;

#[derive(Debug, Clone, Serialize)]
pub struct KantorovichSolution {
    #[serde(skip)]
    pub plan: TransportPlan,
    pub potentials: PotentialPair,
    pub cost: f64,
    pub dual_objective: f64,
    pub pivots: usize,
}

/// Exact optimal coupling for `c = d²/2` with dual potentials.
pub fn solve_kantorovich(space: &Space, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<KantorovichSolution> {
    solve_kantorovich_with(space, mu, nu, PivotRule::default())
}

pub fn solve_kantorovich_with(
    space: &Space,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    rule: PivotRule,
) -> Result<KantorovichSolution> {
    let (sa, sb) = (mu.total_mass(), nu.total_mass());
    if (sa - sb).abs() > tolerances::WEIGHT_MATCH {
        return Err(Error::WeightMismatch { source_total: sa, target_total: sb });
    }
    for size in [mu.len(), nu.len()] {
        if size > MAX_SUPPORT {
            return Err(Error::SupportTooLarge { size, cap: MAX_SUPPORT });
        }
    }
    let mu = mu.clone().validated(space)?;
    let nu = nu.clone().validated(space)?;
    let (n, m) = (mu.len(), nu.len());

    // Every cost is at most (2r)²/2 with r the largest distance from one atom.
    let anchor = &mu.points[0];
    let r = mu.points.iter().chain(&nu.points).map(|p| space.distance_unchecked(anchor, p)).fold(0.0, f64::max);
    let max_cost = 2.0 * r * r;

    let lazy = |i: usize, j: usize| {
        let d = space.distance_unchecked(&mu.points[i], &nu.points[j]);
        0.5 * d * d
    };
    let out = if n * m <= COST_CACHE_LIMIT {
        let table: Vec<f64> = (0..n * m).map(|k| lazy(k / m, k % m)).collect();
        simplex::solve(&mu.weights, &nu.weights, &|i, j| table[i * m + j], max_cost, rule)
    } else {
        simplex::solve(&mu.weights, &nu.weights, &lazy, max_cost, rule)
    };

    let entries: Vec<(usize, usize, f64)> =
        out.flows.into_iter().filter(|f| f.2 > tolerances::FLOW_ZERO).collect();
    let plan = TransportPlan::new(entries, mu.clone(), nu.clone())?;
    let cost = plan.cost(space)?;

    let shift = out.pi_source[0];
    let psi: Vec<f64> = out.pi_source.iter().map(|p| p - shift).collect();
    let phi = c_transform(space, &psi, &mu.points, &nu.points)?;
    let potentials = PotentialPair::assess(space, psi, phi, &plan)?;
    let dual_objective = potentials.dual_objective(&mu, &nu);
    Ok(KantorovichSolution { plan, potentials, cost, dual_objective, pivots: out.pivots })
}

/// Minimum over all permutation couplings of two uniform measures of equal size.
pub fn brute_force_oracle(space: &Space, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(TransportPlan, f64)> {
    let n = mu.len();
    if n != nu.len() {
        return Err(Error::UnsupportedShape(format!("{n} sources but {} targets", nu.len())));
    }
    if n == 0 || n > MAX_BRUTE_FORCE {
        return Err(Error::UnsupportedShape(format!("support size {n} outside 1..={MAX_BRUTE_FORCE}")));
    }
    let w = 1.0 / n as f64;
    if mu.weights.iter().chain(&nu.weights).any(|x| (x - w).abs() > tolerances::WEIGHT_SUM) {
        return Err(Error::UnsupportedShape("weights are not uniform".into()));
    }
    let c: Vec<Vec<f64>> = mu
        .points
        .iter()
        .map(|x| {
            nu.points
                .iter()
                .map(|y| {
                    let d = space.distance(x, y)?;
                    Ok(0.5 * d * d)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..n).permutations(n) {
        let total: f64 = perm.iter().enumerate().map(|(i, &j)| c[i][j]).sum::<f64>() * w;
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, perm));
        }
    }
    let (cost, perm) = best.expect("at least one permutation");
    let plan = TransportPlan::new(perm.iter().enumerate().map(|(i, &j)| (i, j, w)).collect(), mu.clone(), nu.clone())?;
    Ok((plan, cost))
}

/// `ψ^c(y) = min_{x ∈ A} ψ(x) + c(x, y)` for every `y` in `b`.
pub fn c_transform(space: &Space, psi: &[f64], a: &[Point], b: &[Point]) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if psi.len() != a.len() {
        return Err(Error::InvalidMeasure(format!("{} values for {} points", psi.len(), a.len())));
    }
    Ok(b
        .iter()
        .map(|y| {
            a.iter()
                .zip(psi)
                .map(|(x, p)| {
                    let d = space.distance_unchecked(x, y);
                    p + 0.5 * d * d
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}

/// The conjugate transform back to the sources:
/// `φ_c(x) = max_{y ∈ B} φ(y) − c(x, y)` for every `x` in `a`.
pub fn c_transform_back(space: &Space, phi: &[f64], b: &[Point], a: &[Point]) -> Result<Vec<f64>> {
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    if phi.len() != b.len() {
        return Err(Error::InvalidMeasure(format!("{} values for {} points", phi.len(), b.len())));
    }
    Ok(a
        .iter()
        .map(|x| {
            b.iter()
                .zip(phi)
                .map(|(y, p)| {
                    let d = space.distance_unchecked(x, y);
                    p - 0.5 * d * d
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect())
}

/// Target indices `j` with `|φ_j − ψ_i − c(x_i, y_j)| ≤ tol`.
pub fn c_subdifferential(
    space: &Space,
    potentials: &PotentialPair,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    x_index: usize,
    tol: f64,
) -> Result<Vec<usize>> {
    let x = mu.points.get(x_index).ok_or_else(|| Error::MapUndefined(format!("no source atom {x_index}")))?;
    let psi = potentials.psi[x_index];
    Ok(nu
        .points
        .iter()
        .zip(&potentials.phi)
        .enumerate()
        .filter(|(_, (y, phi))| {
            let d = space.distance_unchecked(x, y);
            (*phi - psi - 0.5 * d * d).abs() <= tol
        })
        .map(|(j, _)| j)
        .collect())
}

/// `ψ_R(x) = min { φ(y) − c(x, y) : y ∈ supp ν, d(y0, y) < R }`.
pub fn psi_r(
    space: &Space,
    potentials: &PotentialPair,
    nu: &DiscreteMeasure,
    x: &Point,
    y0: &Point,
    radius: f64,
) -> Result<f64> {
    space.validate(x)?;
    space.validate(y0)?;
    let mut best = f64::INFINITY;
    let mut any = false;
    for (y, phi) in nu.points.iter().zip(&potentials.phi) {
        if space.distance_unchecked(y0, y) < radius {
            any = true;
            let d = space.distance_unchecked(x, y);
            best = best.min(phi - 0.5 * d * d);
        }
    }
    if any {
        Ok(best)
    } else {
        Err(Error::EmptyBall)
    }
}
