use rand::seq::IndexedRandom;
use rand::Rng;
use serde::Deserialize;

use super::instances::connected_edges;
use super::{invalid, Outcome};
use crate::error::Result;
use crate::geometry::{cat0_defect, comparison_angles, default_angle_schedule, project_convex, ConvexSet, Point};
use crate::rng;
use crate::spaces::{Space, SpaceKind};
use crate::tolerances;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SuiteParams {
    /// Samples for the metric, constant-speed and curvature checks.
    #[serde(default = "ten_thousand")]
    samples: usize,
    #[serde(default = "thousand")]
    angle_pairs: usize,
    #[serde(default = "thousand")]
    projection_samples: usize,
    #[serde(default = "unit")]
    scale: f64,
}

fn ten_thousand() -> usize {
    10_000
}
fn thousand() -> usize {
    1_000
}
fn unit() -> f64 {
    1.0
}

pub(crate) fn suite(space: &Space, p: SuiteParams, seed: u64) -> Result<Outcome> {
    if !(p.scale > 0.0) {
        return Err(invalid("params.scale", "must be positive"));
    }
    let mut out = Outcome::new();
    metric_checks(space, &p, seed, &mut out)?;
    angle_checks(space, &p, seed, &mut out)?;
    projection_checks(space, &p, seed, &mut out)?;
    Ok(out)
}

fn metric_checks(space: &Space, p: &SuiteParams, seed: u64, out: &mut Outcome) -> Result<()> {
    let tol = tolerances::METRIC;
    let mut r = rng::stream(seed, "geometry-metric");
    let flat = matches!(space.kind(), SpaceKind::Euclidean);
    let (mut metric, mut speed, mut curvature) = (0usize, 0usize, 0usize);
    let (mut min_defect, mut max_abs_defect) = (f64::INFINITY, 0.0f64);
    for _ in 0..p.samples {
        let x = space.sample_point(&mut r, p.scale);
        let y = space.sample_point(&mut r, p.scale);
        let z = space.sample_point(&mut r, p.scale);
        let (dxy, dyx) = (space.distance(&x, &y)?, space.distance(&y, &x)?);
        let (dxz, dyz) = (space.distance(&x, &z)?, space.distance(&y, &z)?);
        let bad = (dxy - dyx).abs() > tol
            || space.distance(&x, &x)? > tol
            || dxy < 0.0
            || dxz > dxy + dyz + tol
            || dxy > dxz + dyz + tol
            || dyz > dxy + dxz + tol;
        metric += bad as usize;

        let g = space.geodesic(&x, &y)?;
        let (s, t) = (r.random_range(0.0..=1.0), r.random_range(0.0..=1.0));
        let d = space.distance(&g.eval(s), &g.eval(t))?;
        speed += ((d - (s - t).abs() * g.length()).abs() > tol) as usize;

        let defect = cat0_defect(space, &x, &y, &z, r.random_range(0.0..=1.0))?;
        min_defect = min_defect.min(defect);
        max_abs_defect = max_abs_defect.max(defect.abs());
        curvature += (defect < -tol || (flat && defect.abs() > tol)) as usize;
    }
    out.push("metric_violations", metric as f64);
    out.push("speed_violations", speed as f64);
    out.push("min_defect", min_defect);
    if flat {
        out.push("max_abs_defect", max_abs_defect);
    }
    out.push("curvature_violations", curvature as f64);
    out.require(metric == 0 && speed == 0 && curvature == 0);
    Ok(())
}

fn angle_checks(space: &Space, p: &SuiteParams, seed: u64, out: &mut Outcome) -> Result<()> {
    let mut r = rng::stream(seed, "geometry-angle");
    let mut violations = 0usize;
    let mut checked = 0usize;
    while checked < p.angle_pairs {
        let o = space.sample_point(&mut r, p.scale);
        let g = space.geodesic(&o, &space.sample_point(&mut r, p.scale))?;
        let e = space.geodesic(&o, &space.sample_point(&mut r, p.scale))?;
        if g.length() < 1e-6 || e.length() < 1e-6 {
            continue;
        }
        checked += 1;
        let values = comparison_angles(space, &g, &e, &default_angle_schedule(&g, &e))?;
        // Shrinking s must not increase the comparison angle.
        violations += values.windows(2).any(|w| w[1] > w[0] + tolerances::METRIC) as usize;
    }
    out.push("angle_pairs", checked as f64);
    out.push("angle_monotonicity_violations", violations as f64);
    out.require(violations == 0);
    Ok(())
}

/// A random convex set together with a sampler for its points.
fn random_set<R: Rng + ?Sized>(space: &Space, r: &mut R, scale: f64) -> Result<ConvexSet> {
    let kinds = if space.as_tree().is_some() { 3 } else { 2 };
    Ok(match r.random_range(0..kinds) {
        0 => ConvexSet::Ball { center: space.sample_point(r, scale), radius: r.random_range(0.1..1.0) * scale },
        1 => ConvexSet::Segment(space.sample_point(r, scale), space.sample_point(r, scale)),
        _ => {
            let tree = space.as_tree().expect("tree");
            let size = r.random_range(1..=tree.edges().len().min(4));
            ConvexSet::Subtree { edges: connected_edges(tree, r, size) }
        }
    })
}

fn point_in<R: Rng + ?Sized>(space: &Space, r: &mut R, set: &ConvexSet, scale: f64) -> Result<Point> {
    match set {
        ConvexSet::Ball { center, radius } => {
            let z = space.sample_point(r, scale);
            let d = space.distance(center, &z)?;
            let t = if d <= *radius { 1.0 } else { radius / d * r.random_range(0.0..=1.0) };
            space.convex_combination(center, &z, t)
        }
        ConvexSet::Segment(a, b) => space.convex_combination(a, b, r.random_range(0.0..=1.0)),
        ConvexSet::Subtree { edges } => {
            let tree = space.as_tree().expect("tree");
            let e = *edges.choose(r).expect("non-empty");
            Ok(Point::on_edge(e, r.random_range(0.0..=tree.edges()[e].length)))
        }
    }
}

fn projection_checks(space: &Space, p: &SuiteParams, seed: u64, out: &mut Outcome) -> Result<()> {
    let tol = tolerances::METRIC;
    let mut r = rng::stream(seed, "geometry-projection");
    let (mut inequality, mut idempotence) = (0usize, 0usize);
    for _ in 0..p.projection_samples {
        let set = random_set(space, &mut r, p.scale)?;
        let x = space.sample_point(&mut r, 2.0 * p.scale);
        let px = project_convex(space, &x, &set)?;
        let y = point_in(space, &mut r, &set, p.scale)?;
        let (a, b, c) = (space.distance(&x, &px)?, space.distance(&y, &px)?, space.distance(&x, &y)?);
        inequality += (a * a + b * b > c * c + tol) as usize;
        let w = space.convex_combination(&x, &px, r.random_range(0.0..=1.0))?;
        let pw = project_convex(space, &w, &set)?;
        idempotence += (space.distance(&pw, &px)? > tol) as usize;
    }
    out.push("projection_samples", p.projection_samples as f64);
    out.push("projection_inequality_violations", inequality as f64);
    out.push("projection_idempotence_violations", idempotence as f64);
    out.require(inequality == 0 && idempotence == 0);
    Ok(())
}
