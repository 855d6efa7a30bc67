//! Shell (co-area) estimators for sphere-sliced measures.
//!
//! With `ρ = d(γ(0), ·)`, the sphere measure `H_{d−1}({ρ = r} ∩ S)` is
//! approximated by `vol({|ρ − r| < ε} ∩ S) / 2ε`. Integrating over
//! `r ∈ [0, ℓ(γ)]` turns the estimator into the mean of
//! `g(u) = |[ρ(u) − ε, ρ(u) + ε] ∩ [0, ℓ]| / 2ε` over `S`, times `vol(S)`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Geodesic, Point};
use crate::rng;
use crate::spaces::{Space, SpaceKind};
use crate::tolerances;

/// Batches used for the batch-means standard error.
pub const BATCHES: usize = 20;

/// Regions the shell estimator can sample from.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// Axis-aligned box in one chart (Euclidean space or a book page).
    Box { chart: usize, lo: Vec<f64>, hi: Vec<f64> },
    /// Closed metric ball.
    Ball { center: Point, radius: f64 },
    /// Union of whole tree edges.
    Subtree { edges: Vec<usize> },
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EilenbergReport {
    pub lhs: f64,
    pub rhs: f64,
    pub sigma: f64,
    pub holds: bool,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaReport {
    pub densities: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub min_density: f64,
    pub positive: bool,
}

/// Axis-aligned boxes covering a region, with a membership test.
struct Proposal<'a> {
    boxes: Vec<(usize, Vec<f64>, Vec<f64>)>,
    cumulative: Vec<f64>,
    total: f64,
    member: Box<dyn Fn(&Point) -> bool + 'a>,
}

impl<'a> Proposal<'a> {
    fn new(boxes: Vec<(usize, Vec<f64>, Vec<f64>)>, member: Box<dyn Fn(&Point) -> bool + 'a>) -> Self {
        let mut total = 0.0;
        let boxes: Vec<_> = boxes
            .into_iter()
            .filter(|(_, lo, hi)| lo.iter().zip(hi).all(|(a, b)| b > a))
            .collect();
        let cumulative = boxes
            .iter()
            .map(|(_, lo, hi)| {
                total += lo.iter().zip(hi).map(|(a, b)| b - a).product::<f64>();
                total
            })
            .collect();
        Self { boxes, cumulative, total, member }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let r = rng.random_range(0.0..self.total);
        let i = self.cumulative.partition_point(|&c| c <= r).min(self.boxes.len() - 1);
        let (chart, lo, hi) = &self.boxes[i];
        let coords: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| rng.random_range(*a..*b)).collect();
        Point::new(*chart, coords)
    }
}

fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * std::f64::consts::TAU / d as f64,
    }
}

/// Proposal for `region` plus its exact volume when known in closed form.
fn proposal<'a>(space: &'a Space, region: &'a Region) -> Result<(Proposal<'a>, f64)> {
    let unsupported = |why: &str| Err(Error::UnsupportedRegion(why.to_string()));
    match (space.kind(), region) {
        (_, Region::Empty) => unsupported("empty region has no proposal"),
        (SpaceKind::Euclidean | SpaceKind::OpenBook { .. }, Region::Box { chart, lo, hi }) => {
            let probe = Point::new(*chart, lo.clone());
            space.validate(&probe).map_err(|e| Error::UnsupportedRegion(e.to_string()))?;
            if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
                return unsupported("box needs lo < hi in every coordinate");
            }
            let p = Proposal::new(vec![(*chart, lo.clone(), hi.clone())], Box::new(|_| true));
            let volume = p.total;
            Ok((p, volume))
        }
        (SpaceKind::Euclidean, Region::Ball { center, radius }) => {
            space.validate(center)?;
            if !(*radius > 0.0) {
                return unsupported("ball radius must be positive");
            }
            let lo = center.coords.iter().map(|c| c - radius).collect();
            let hi = center.coords.iter().map(|c| c + radius).collect();
            let (c, r) = (center.clone(), *radius);
            let p = Proposal::new(vec![(0, lo, hi)], Box::new(move |x| space.distance_unchecked(&c, x) <= r));
            Ok((p, unit_ball_volume(space.dim()) * radius.powi(space.dim() as i32)))
        }
        (SpaceKind::OpenBook { pages }, Region::Ball { center, radius }) => {
            let center = space.normalize(center)?;
            if !(*radius > 0.0) {
                return unsupported("ball radius must be positive");
            }
            let (u, v, r) = (center.coords[0], center.coords[1], *radius);
            let mut boxes = Vec::new();
            for page in 0..*pages {
                let (near, far) = if page == center.chart { ((u - r).max(0.0), u + r) } else { (0.0, r - u) };
                if far > 0.0 {
                    boxes.push((page, vec![near, v - r], vec![far, v + r]));
                }
            }
            let c = center.clone();
            let p = Proposal::new(boxes, Box::new(move |x| space.distance_unchecked(&c, x) <= r));
            Ok((p, f64::NAN))
        }
        (SpaceKind::Tree(tree), Region::Ball { center, radius }) => {
            let center = space.normalize(center)?;
            if !(*radius > 0.0) {
                return unsupported("ball radius must be positive");
            }
            let boxes: Vec<_> = tree.ball_pieces(&center, *radius).into_iter().map(|(e, a, b)| (e, vec![a], vec![b])).collect();
            let p = Proposal::new(boxes, Box::new(|_| true));
            let volume = p.total;
            Ok((p, volume))
        }
        (SpaceKind::Tree(tree), Region::Subtree { edges }) => {
            if edges.is_empty() {
                return unsupported("empty subtree");
            }
            let mut edges = edges.clone();
            edges.sort_unstable();
            edges.dedup();
            let mut boxes = Vec::new();
            for e in edges {
                let edge = tree.edges().get(e).ok_or_else(|| Error::UnsupportedRegion(format!("edge {e} does not exist")))?;
                boxes.push((e, vec![0.0], vec![edge.length]));
            }
            let p = Proposal::new(boxes, Box::new(|_| true));
            let volume = p.total;
            Ok((p, volume))
        }
        (_, Region::Subtree { .. }) => unsupported("subtrees exist only in trees"),
        (SpaceKind::Tree(_), Region::Box { .. }) => unsupported("boxes are not defined on trees"),
    }
}

/// Diameter of a region (exact for every supported region).
pub fn region_diameter(space: &Space, region: &Region) -> Result<f64> {
    match region {
        Region::Empty => Ok(0.0),
        Region::Box { lo, hi, .. } => Ok(lo.iter().zip(hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()),
        Region::Ball { center, radius } => match space.kind() {
            SpaceKind::Tree(tree) => {
                let ends: Vec<Point> = tree
                    .ball_pieces(&space.normalize(center)?, *radius)
                    .into_iter()
                    .flat_map(|(e, a, b)| [Point::on_edge(e, a), Point::on_edge(e, b)])
                    .collect();
                Ok(max_pairwise(space, &ends))
            }
            _ => Ok(2.0 * radius),
        },
        Region::Subtree { edges } => {
            let tree = space.as_tree().ok_or_else(|| Error::UnsupportedRegion("subtrees exist only in trees".into()))?;
            let mut ends = Vec::new();
            for &e in edges {
                let edge = tree.edges().get(e).ok_or_else(|| Error::UnsupportedRegion(format!("edge {e} does not exist")))?;
                ends.push(Point::on_edge(e, 0.0));
                ends.push(Point::on_edge(e, edge.length));
            }
            Ok(max_pairwise(space, &ends))
        }
    }
}

fn max_pairwise(space: &Space, points: &[Point]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.max(space.distance_unchecked(p, q));
        }
    }
    best
}

fn shell_weight(rho: f64, eps: f64, upper: f64) -> f64 {
    let lo = (rho - eps).max(0.0);
    let hi = (rho + eps).min(upper);
    (hi - lo).max(0.0) / (2.0 * eps)
}

/// Mean and batch-means standard error of `values`.
fn batch_mean(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < BATCHES {
        return (mean, 0.0);
    }
    let size = n / BATCHES;
    let means: Vec<f64> = (0..BATCHES).map(|b| values[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let m = means.iter().sum::<f64>() / BATCHES as f64;
    let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (BATCHES - 1) as f64;
    (mean, (var / BATCHES as f64).sqrt())
}

/// Monte Carlo check of `∫_γ H_{d−1}(R_γ^{-1}(y) ∩ S) dy ≤ H_d(S)`.
///
/// `eps` defaults to `diam(S) / 200`. The right-hand side is the exact volume
/// when it has a closed form and the Monte Carlo volume otherwise.
pub fn eilenberg_estimate(
    space: &Space,
    gamma: &Geodesic,
    region: &Region,
    n_samples: usize,
    eps: Option<f64>,
    seed: u64,
) -> Result<EilenbergReport> {
    let diam = region_diameter(space, region)?;
    if let Region::Empty = region {
        return Ok(EilenbergReport { lhs: 0.0, rhs: 0.0, sigma: 0.0, holds: true, epsilon: eps.unwrap_or(0.0) });
    }
    let limit = diam / 10.0;
    let eps = eps.unwrap_or(diam / 200.0);
    if !(eps > 0.0 && eps <= limit) {
        return Err(Error::BadEpsilon { eps, limit });
    }
    if n_samples == 0 {
        return Err(Error::ParamOutOfRange { name: "n_samples", value: 0.0 });
    }
    let (proposal, exact_volume) = proposal(space, region)?;
    let mut rng = rng::stream(seed, "eilenberg");
    let origin = gamma.start();
    let mut g = Vec::with_capacity(n_samples);
    let mut inside = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let u = proposal.sample(&mut rng);
        if (proposal.member)(&u) {
            g.push(proposal.total * shell_weight(space.distance_unchecked(origin, &u), eps, gamma.length()));
            inside.push(proposal.total);
        } else {
            g.push(0.0);
            inside.push(0.0);
        }
    }
    let (lhs, sigma) = batch_mean(&g);
    let rhs = if exact_volume.is_nan() { batch_mean(&inside).0 } else { exact_volume };
    // When S sits inside the shell range the integrand is constant, σ = 0 and
    // lhs = rhs up to summation rounding.
    let holds = lhs <= rhs + 3.0 * sigma + tolerances::METRIC * rhs.max(1.0);
    Ok(EilenbergReport { lhs, rhs, sigma, holds, epsilon: eps })
}

/// Local density of the sphere-sliced measure around each probe.
///
/// For a probe `p`, samples `u` uniformly in `B(p, 5ε)` and averages
/// `|[ρ(u) − ε, ρ(u) + ε] ∩ [0, ∞)| / 2ε`, which is 1 wherever the distance
/// function from `x` has unit slope.
pub fn zeta_positivity(
    space: &Space,
    x: &Point,
    gamma: &Geodesic,
    probes: &[Point],
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ZetaReport> {
    let gap = space.distance(gamma.start(), x)?;
    if gap > tolerances::METRIC {
        return Err(Error::OriginMismatch { gap });
    }
    if !(eps > 0.0) {
        return Err(Error::BadEpsilon { eps, limit: f64::INFINITY });
    }
    if probes.is_empty() {
        return Err(Error::EmptySet);
    }
    if n_samples == 0 {
        return Err(Error::ParamOutOfRange { name: "n_samples", value: 0.0 });
    }
    let mut densities = Vec::new();
    let mut sigmas = Vec::new();
    let mut rng = rng::stream(seed, "zeta");
    for probe in probes {
        if space.distance(probe, x)? <= tolerances::METRIC {
            return Err(Error::ProbeAtCenter);
        }
        let region = Region::Ball { center: probe.clone(), radius: 5.0 * eps };
        let (proposal, _) = proposal(space, &region)?;
        let mut values = Vec::with_capacity(n_samples);
        let mut accepted = 0;
        while accepted < n_samples {
            let u = proposal.sample(&mut rng);
            if (proposal.member)(&u) {
                values.push(shell_weight(space.distance_unchecked(x, &u), eps, f64::INFINITY));
                accepted += 1;
            }
        }
        let (mean, sigma) = batch_mean(&values);
        densities.push(mean);
        sigmas.push(sigma);
    }
    let min_density = densities.iter().copied().fold(f64::INFINITY, f64::min);
    let positive = densities.iter().zip(&sigmas).all(|(m, s)| m - 3.0 * s > 0.0);
    Ok(ZetaReport { densities, sigmas, min_density, positive })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn empty_region_is_trivial() {
        let e2 = Space::euclidean(2).unwrap();
        let g = e2.geodesic(&Point::euclidean(vec![0.0, 0.0]), &Point::euclidean(vec![1.0, 0.0])).unwrap();
        let r = eilenberg_estimate(&e2, &g, &Region::Empty, 10, None, 1).unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (0.0, 0.0, true));
    }

    #[test]
    fn bad_epsilon() {
        let e2 = Space::euclidean(2).unwrap();
        let g = e2.geodesic(&Point::euclidean(vec![0.0, 0.0]), &Point::euclidean(vec![1.0, 0.0])).unwrap();
        let square = Region::Box { chart: 0, lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] };
        assert!(matches!(eilenberg_estimate(&e2, &g, &square, 10, Some(0.0), 1), Err(Error::BadEpsilon { .. })));
        assert!(matches!(eilenberg_estimate(&e2, &g, &square, 10, Some(0.5), 1), Err(Error::BadEpsilon { .. })));
    }

    #[test]
    fn book_ball_proposal_covers_the_ball() {
        // Center near the spine: the ball spills into the other pages.
        let book = Space::open_book(3).unwrap();
        let region = Region::Ball { center: Point::page(1, 0.2, 0.0), radius: 0.5 };
        let (p, _) = proposal(&book, &region).unwrap();
        let mut rng = rng::stream(3, "test");
        let mut hits = [0usize; 3];
        for _ in 0..20_000 {
            let u = p.sample(&mut rng);
            if (p.member)(&u) {
                hits[u.chart] += 1;
            }
        }
        assert!(hits.iter().all(|&h| h > 0));
        // Every point of the ball lies in some proposal box.
        for page in 0..3 {
            for k in 0..50 {
                let a = std::f64::consts::TAU * k as f64 / 50.0;
                let q = Point::page(page, (0.45 * a.cos()).abs(), 0.45 * a.sin());
                if book.distance(&q, &Point::page(1, 0.2, 0.0)).unwrap() <= 0.5 {
                    let covered = p.boxes.iter().any(|(c, lo, hi)| {
                        *c == q.chart && q.coords.iter().zip(lo.iter().zip(hi)).all(|(x, (a, b))| *a <= *x && x <= b)
                    });
                    assert!(covered, "{q:?}");
                }
            }
        }
    }
}
