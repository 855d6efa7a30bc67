use rand::seq::IndexedRandom;
use rand::Rng;
use serde::Deserialize;

use super::instances::{connected_edges, distinct_points, point_from_vertex};
use super::{invalid, Outcome};
use crate::calculus::{
    cost, eilenberg_estimate, fermat_check, sample_directions, twist_test, Region, DEFAULT_DIRECTIONS,
};
use crate::error::{Direction, Error, Result};
use crate::geometry::{Geodesic, Point};
use crate::rng;
use crate::spaces::{Space, SpaceKind};
use crate::tolerances;
use crate::transport::{extract_monge_map, solve_kantorovich, DiscreteMeasure, Grid, MongeOutcome};

fn directions() -> usize {
    DEFAULT_DIRECTIONS
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TwistParams {
    #[serde(default = "two_hundred")]
    pairs: usize,
    /// Radius of the ball holding `y1`, `y2` around `x`.
    #[serde(default = "half")]
    radius: f64,
    #[serde(default = "directions")]
    directions: usize,
}

fn two_hundred() -> usize {
    200
}
fn half() -> f64 {
    0.5
}

/// A random point at distance less than `r` from the flat point `(u, v)`,
/// kept in the open half plane `u > 0`.
fn near_flat<R: Rng + ?Sized>(rng: &mut R, c: &[f64], r: f64) -> Vec<f64> {
    loop {
        let off: Vec<f64> = c.iter().map(|_| rng.random_range(-r..r)).collect();
        if off.iter().map(|o| o * o).sum::<f64>() < r * r && off.iter().any(|&o| o != 0.0) {
            return c.iter().zip(&off).map(|(a, b)| a + b).collect();
        }
    }
}

/// Flat spaces: random `x` and `y1 ≠ y2` in `B(x, r)`, twist must hold.
/// Trees: `y1`, `y2` equidistant from a branch point `b` on two edges at `b`
/// and `x` on a third, so every direction at `x` sees the same derivative.
pub(crate) fn twist(space: &Space, p: TwistParams, seed: u64) -> Result<Outcome> {
    if p.pairs == 0 {
        return Err(invalid("params.pairs", "must be positive"));
    }
    if !(p.radius > 0.0) {
        return Err(invalid("params.radius", "must be positive"));
    }
    let mut r = rng::stream(seed, "twist");
    let (mut lo, mut hi, mut holds) = (f64::INFINITY, 0.0f64, 0usize);
    let tree = space.as_tree();
    let branch: Vec<usize> = tree.map(|t| (0..t.vertex_count()).filter(|&v| t.degree(v) >= 3).collect()).unwrap_or_default();
    if tree.is_some() && branch.is_empty() {
        return Err(invalid("space", "the tree has no branch point"));
    }
    for _ in 0..p.pairs {
        let (x, y1, y2, dirs) = match space.kind() {
            SpaceKind::Tree(t) => {
                let b = *branch.choose(&mut r).expect("non-empty");
                let mut legs = t.incident(b).to_vec();
                for i in (1..legs.len()).rev() {
                    legs.swap(i, r.random_range(0..=i));
                }
                let len = |e: usize| t.edges()[e].length;
                let x = point_from_vertex(t, legs[0], b, r.random_range(0.05..0.95) * len(legs[0]));
                let s = r.random_range(0.05..0.95) * len(legs[1]).min(len(legs[2]));
                let y1 = point_from_vertex(t, legs[1], b, s);
                let y2 = point_from_vertex(t, legs[2], b, s);
                let dirs = sample_directions(space, &x, p.directions, p.radius)?;
                (x, y1, y2, dirs)
            }
            SpaceKind::OpenBook { pages } => {
                let page = r.random_range(0..*pages);
                let c = [r.random_range(1.5 * p.radius..3.0 * p.radius), r.random_range(-1.0..1.0)];
                let x = Point::page(page, c[0], c[1]);
                let y1 = near_flat(&mut r, &c, p.radius);
                let y2 = near_flat(&mut r, &c, p.radius);
                let (y1, y2) = (Point::page(page, y1[0], y1[1]), Point::page(page, y2[0], y2[1]));
                let mut dirs = sample_directions(space, &x, p.directions, 0.5 * p.radius)?;
                dirs.push(space.geodesic(&x, &y1)?);
                dirs.push(space.geodesic(&x, &y2)?);
                (x, y1, y2, dirs)
            }
            SpaceKind::Euclidean => {
                let x = space.sample_point(&mut r, 1.0);
                let y1 = Point::euclidean(near_flat(&mut r, &x.coords, p.radius));
                let y2 = Point::euclidean(near_flat(&mut r, &x.coords, p.radius));
                let mut dirs = sample_directions(space, &x, p.directions, 0.5 * p.radius)?;
                dirs.push(space.geodesic(&x, &y1)?);
                dirs.push(space.geodesic(&x, &y2)?);
                (x, y1, y2, dirs)
            }
        };
        let rep = twist_test(space, &x, &y1, &y2, &dirs)?;
        lo = lo.min(rep.max_gap);
        hi = hi.max(rep.max_gap);
        holds += rep.twist_holds as usize;
    }
    let mut out = Outcome::new();
    out.push("pairs", p.pairs as f64);
    out.push("twist_holds", holds as f64);
    out.push("min_gap", lo);
    out.push("max_gap", hi);
    if tree.is_some() {
        out.require(hi < tolerances::METRIC && holds == 0);
    } else {
        out.require(lo > tolerances::TWIST_GAP && holds == p.pairs);
    }
    Ok(out)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct FermatParams {
    /// Grid nodes per side (Euclidean plane).
    #[serde(default = "nine")]
    n: usize,
    /// Candidate minimizers checked.
    #[serde(default = "ten")]
    candidates: usize,
    #[serde(default = "directions")]
    directions: usize,
    /// `C` in `min_directional ≥ −C·h` (per unit speed).
    #[serde(default = "unit")]
    constant: f64,
    /// Two-sided vanishing tolerance at smooth minima.
    #[serde(default = "two_sided_tol")]
    tol: f64,
}

fn nine() -> usize {
    9
}
fn ten() -> usize {
    10
}
fn unit() -> f64 {
    1.0
}
fn two_sided_tol() -> f64 {
    1e-6
}

/// Euclidean plane: `f = ψ̃ + c(·, T(x))` with `ψ̃` the bilinear interpolant of
/// the solver potential on a grid, checked at grid minimizers `x`.
/// Trees: `f = d(·, leaf)` at every leaf, one-sided only.
/// Elsewhere: `f = c(·, y)` at `y`, which must also be two-sided.
pub(crate) fn fermat(space: &Space, p: FermatParams, seed: u64) -> Result<Outcome> {
    if p.candidates == 0 {
        return Err(invalid("params.candidates", "must be positive"));
    }
    let mut r = rng::stream(seed, "fermat");
    let mut out = Outcome::new();
    match space.kind() {
        SpaceKind::Euclidean if space.dim() == 2 => {
            if p.n < 3 {
                return Err(invalid("params.n", "needs at least one interior node"));
            }
            let grid = Grid::unit_square(p.n);
            let h = grid.pitch;
            let mu = DiscreteMeasure::uniform(space, grid.points())?;
            let targets: Vec<Point> = (0..grid.len())
                .map(|_| Point::euclidean(vec![r.random_range(0.5..1.5), r.random_range(0.0..1.0)]))
                .collect();
            let nu = DiscreteMeasure::uniform(space, targets)?;
            let sol = solve_kantorovich(space, &mu, &nu)?;
            let map = match extract_monge_map(&sol.plan, tolerances::FLOW_ZERO) {
                MongeOutcome::Map { map, .. } => map,
                MongeOutcome::NotDeterministic { split_mass } => {
                    return Err(Error::NotDeterministic { direction: Direction::Forward, split_mass })
                }
            };
            let psi = &sol.potentials.psi;
            let interior = grid.interior();
            let (mut worst, mut verified) = (f64::INFINITY, 0usize);
            for _ in 0..p.candidates {
                let k = *interior.choose(&mut r).expect("interior nodes");
                let y = map.image(k)?.clone();
                let f = |z: &Point| grid.interpolate(psi, z) + cost(space, z, &y).unwrap_or(f64::NAN);
                let fk = f(&mu.points[k]);
                if mu.points.iter().all(|z| f(z) >= fk - tolerances::MARGINAL) {
                    verified += 1;
                }
                let dirs = sample_directions(space, &mu.points[k], p.directions, h)?;
                let rep = fermat_check(space, f, &mu.points[k], &dirs, p.tol)?;
                // Directions have length h; divide by it for the unit-speed slope.
                worst = worst.min(rep.min_directional / h);
            }
            out.push("pitch", h);
            out.push("candidates", p.candidates as f64);
            out.push("verified_minimizers", verified as f64);
            out.push("min_directional_unit", worst);
            out.push("bound", -p.constant * h);
            out.require(verified == p.candidates && worst >= -p.constant * h);
        }
        SpaceKind::Tree(t) => {
            let leaves: Vec<usize> = (0..t.vertex_count()).filter(|&v| t.degree(v) == 1).collect();
            let (mut worst, mut two_sided) = (f64::INFINITY, 0usize);
            for &leaf in &leaves {
                let x = t.vertex_point(leaf);
                let f = |z: &Point| space.distance(z, &x).unwrap_or(f64::NAN);
                let dirs = sample_directions(space, &x, p.directions, 0.5)?;
                let rep = fermat_check(space, f, &x, &dirs, p.tol)?;
                worst = worst.min(rep.min_directional);
                two_sided += rep.two_sided_checked;
            }
            out.push("leaves", leaves.len() as f64);
            out.push("min_directional", worst);
            out.push("two_sided_checked", two_sided as f64);
            out.require(!leaves.is_empty() && worst > 0.0);
        }
        _ => {
            let ys = distinct_points(space, &mut r, p.candidates, 1.0);
            let (mut worst, mut zero) = (f64::INFINITY, 0usize);
            for y in &ys {
                let f = |z: &Point| cost(space, z, y).unwrap_or(f64::NAN);
                let dirs = sample_directions(space, y, p.directions, 0.25)?;
                let rep = fermat_check(space, f, y, &dirs, p.tol)?;
                worst = worst.min(rep.min_directional);
                zero += rep.two_sided_zero as usize;
            }
            out.push("candidates", ys.len() as f64);
            out.push("min_directional", worst);
            out.push("two_sided_zero", zero as f64);
            out.require(worst >= -p.tol && zero == ys.len());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct EilenbergParams {
    /// Explicit configuration: `γ` from `gamma[0]` to `gamma[1]` and a region.
    #[serde(default)]
    gamma: Option<(Point, Point)>,
    #[serde(default)]
    region: Option<Region>,
    #[serde(default = "samples")]
    samples: usize,
    #[serde(default)]
    eps: Option<f64>,
    /// Random configurations when no explicit one is given.
    #[serde(default = "hundred")]
    configs: usize,
}

fn samples() -> usize {
    100_000
}
fn hundred() -> usize {
    100
}

fn random_config<R: Rng + ?Sized>(space: &Space, r: &mut R, k: usize) -> Result<(Geodesic, Region)> {
    let pts = distinct_points(space, r, 2, 1.0);
    let gamma = space.geodesic(&pts[0], &pts[1])?;
    let region = match space.kind() {
        SpaceKind::Euclidean => {
            let lo: Vec<f64> = (0..space.dim()).map(|_| r.random_range(-1.0..1.0)).collect();
            let hi = lo.iter().map(|a| a + r.random_range(0.2..1.0)).collect();
            if k.is_multiple_of(2) {
                Region::Box { chart: 0, lo, hi }
            } else {
                Region::Ball { center: Point::euclidean(lo), radius: r.random_range(0.2..1.0) }
            }
        }
        SpaceKind::OpenBook { pages } => {
            if k.is_multiple_of(2) {
                let lo = vec![r.random_range(0.0..1.0), r.random_range(-1.0..1.0)];
                let hi = lo.iter().map(|a| a + r.random_range(0.2..1.0)).collect();
                Region::Box { chart: r.random_range(0..*pages), lo, hi }
            } else {
                Region::Ball { center: space.sample_point(r, 1.0), radius: r.random_range(0.2..1.0) }
            }
        }
        SpaceKind::Tree(t) => {
            if k.is_multiple_of(2) {
                let size = r.random_range(1..=t.edges().len().min(4));
                Region::Subtree { edges: connected_edges(t, r, size) }
            } else {
                Region::Ball { center: space.sample_point(r, 1.0), radius: r.random_range(0.2..1.0) }
            }
        }
    };
    Ok((gamma, region))
}

pub(crate) fn eilenberg(space: &Space, p: EilenbergParams, seed: u64) -> Result<Outcome> {
    if p.samples == 0 {
        return Err(invalid("params.samples", "must be positive"));
    }
    let mut out = Outcome::new();
    match (&p.gamma, &p.region) {
        (Some((a, b)), Some(region)) => {
            let gamma = space.geodesic(a, b).map_err(|e| invalid("params.gamma", e.to_string()))?;
            let rep = eilenberg_estimate(space, &gamma, region, p.samples, p.eps, seed)?;
            out.push_sigma("lhs", rep.lhs, rep.sigma);
            out.push("rhs", rep.rhs);
            out.push("epsilon", rep.epsilon);
            out.push("holds", rep.holds as u8 as f64);
            out.require(rep.holds);
        }
        (Some(_), None) => return Err(invalid("params.region", "required with params.gamma")),
        (None, Some(_)) => return Err(invalid("params.gamma", "required with params.region")),
        (None, None) => {
            if p.configs == 0 {
                return Err(invalid("params.configs", "must be positive"));
            }
            let mut r = rng::stream(seed, "eilenberg-configs");
            let (mut holds, mut ratio) = (0usize, 0.0f64);
            for k in 0..p.configs {
                let (gamma, region) = random_config(space, &mut r, k)?;
                let sub = r.random::<u64>();
                let rep = eilenberg_estimate(space, &gamma, &region, p.samples, p.eps, sub)?;
                holds += rep.holds as usize;
                if rep.rhs > 0.0 {
                    ratio = ratio.max(rep.lhs / rep.rhs);
                }
            }
            out.push("configs", p.configs as f64);
            out.push("holds", holds as f64);
            out.push("max_ratio", ratio);
            out.require(holds == p.configs);
        }
    }
    Ok(out)
}
