use serde::Deserialize;

use super::instances::{distinct_points, measure_pair, permutation, uniform_measure};
use super::{invalid, Outcome};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::polar::{inverse_map, maps_agree, polar_factorize, push_forward, verify_measure_preserving};
use crate::rng;
use crate::spaces::{Space, SpaceKind};
use crate::tolerances;
use crate::transport::{
    brute_force_oracle, check_cyclic_monotonicity, extract_monge_map, solve_kantorovich_with, verify_transport_identity,
    CycleMode, DiscreteMeasure, Grid, MongeOutcome, PivotRule, TransportMap, TransportPlan, MAX_BRUTE_FORCE,
};

fn five() -> usize {
    5
}
fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct MeasureSpec {
    points: Vec<Point>,
    /// Uniform when omitted.
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

impl MeasureSpec {
    fn build(&self, space: &Space, path: &str) -> Result<DiscreteMeasure> {
        let n = self.points.len();
        let weights = self.weights.clone().unwrap_or_else(|| vec![1.0 / n.max(1) as f64; n]);
        DiscreteMeasure::new(space, self.points.clone(), weights).map_err(|e| invalid(path, e.to_string()))
    }
}

/// Explicit `source`/`target` measures, or `instances` random pairs of `n` atoms.
fn build_instances(
    space: &Space,
    source: &Option<MeasureSpec>,
    target: &Option<MeasureSpec>,
    n: usize,
    instances: usize,
    scale: f64,
    seed: u64,
) -> Result<Vec<(DiscreteMeasure, DiscreteMeasure)>> {
    match (source, target) {
        (Some(s), Some(t)) => Ok(vec![(s.build(space, "params.source")?, t.build(space, "params.target")?)]),
        (Some(_), None) => Err(invalid("params.target", "required with params.source")),
        (None, Some(_)) => Err(invalid("params.source", "required with params.target")),
        (None, None) => {
            if n == 0 {
                return Err(invalid("params.n", "must be positive"));
            }
            if instances == 0 {
                return Err(invalid("params.instances", "must be positive"));
            }
            if !(scale > 0.0) {
                return Err(invalid("params.scale", "must be positive"));
            }
            let mut r = rng::stream(seed, "instances");
            (0..instances).map(|_| measure_pair(space, &mut r, n, scale)).collect()
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SolveParams {
    #[serde(default)]
    source: Option<MeasureSpec>,
    #[serde(default)]
    target: Option<MeasureSpec>,
    #[serde(default = "five")]
    n: usize,
    #[serde(default = "one")]
    instances: usize,
    #[serde(default = "unit")]
    scale: f64,
    /// Compare against the permutation oracle; defaults to on when it applies.
    #[serde(default)]
    oracle: Option<bool>,
    /// Fraction of instances whose plan must be a map for the run to pass.
    #[serde(default)]
    min_map_fraction: f64,
    #[serde(default)]
    pivot_rule: PivotRule,
}

fn oracle_applies(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> bool {
    let n = mu.len();
    let w = 1.0 / n as f64;
    n == nu.len()
        && n <= MAX_BRUTE_FORCE
        && mu.weights.iter().chain(&nu.weights).all(|x| (x - w).abs() <= tolerances::WEIGHT_SUM)
}

pub(crate) fn solve(space: &Space, p: SolveParams, seed: u64) -> Result<Outcome> {
    if !(0.0..=1.0).contains(&p.min_map_fraction) {
        return Err(invalid("params.min_map_fraction", "must lie in [0, 1]"));
    }
    let pairs = build_instances(space, &p.source, &p.target, p.n, p.instances, p.scale, seed)?;
    let mut out = Outcome::new();
    let (mut gap, mut slack, mut marginal, mut oracle_gap): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let (mut maps, mut pivots, mut total_cost, mut oracle_runs) = (0usize, 0usize, 0.0, 0usize);
    let mut first = None;
    for (mu, nu) in &pairs {
        let sol = solve_kantorovich_with(space, mu, nu, p.pivot_rule)?;
        gap = gap.max((sol.cost - sol.dual_objective).abs());
        slack = slack.max(sol.potentials.slack_max);
        marginal = marginal.max(sol.plan.marginal_error());
        pivots += sol.pivots;
        total_cost += sol.cost;
        if p.oracle.unwrap_or(true) && oracle_applies(mu, nu) {
            let (_, best) = brute_force_oracle(space, mu, nu)?;
            oracle_gap = oracle_gap.max((sol.cost - best).abs());
            oracle_runs += 1;
        } else if p.oracle == Some(true) {
            return Err(invalid("params.oracle", "the permutation oracle needs equal uniform measures of at most 8 atoms"));
        }
        if let MongeOutcome::Map { split_mass, .. } = extract_monge_map(&sol.plan, tolerances::FLOW_ZERO) {
            if split_mass == 0.0 {
                maps += 1;
            }
        }
        first.get_or_insert(sol);
    }
    let count = pairs.len();
    out.push("instances", count as f64);
    if count == 1 {
        let sol = first.expect("one instance");
        out.push("cost", sol.cost);
        out.push("dual_objective", sol.dual_objective);
    } else {
        out.push("mean_cost", total_cost / count as f64);
    }
    out.push("max_duality_gap", gap);
    out.push("max_slack", slack);
    out.push("max_marginal_error", marginal);
    out.push("pivots", pivots as f64);
    out.push("monge_maps", maps as f64);
    out.require(gap <= tolerances::MARGINAL && slack <= tolerances::MARGINAL && marginal <= tolerances::MARGINAL);
    if oracle_runs > 0 {
        out.push("oracle_checked", oracle_runs as f64);
        out.push("max_oracle_gap", oracle_gap);
        out.require(oracle_gap <= tolerances::MARGINAL);
    }
    out.require(maps as f64 >= (p.min_map_fraction * count as f64).ceil());
    Ok(out)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct MonotonicityParams {
    #[serde(default)]
    source: Option<MeasureSpec>,
    #[serde(default)]
    target: Option<MeasureSpec>,
    /// Checks this plan instead of solving.
    #[serde(default)]
    plan: Option<Vec<(usize, usize, f64)>>,
    #[serde(default = "five")]
    n: usize,
    #[serde(default = "one")]
    instances: usize,
    #[serde(default = "unit")]
    scale: f64,
    #[serde(default = "three")]
    max_len: usize,
    /// Random cycles instead of an exhaustive sweep.
    #[serde(default)]
    samples: Option<usize>,
}

fn three() -> usize {
    3
}

pub(crate) fn monotonicity(space: &Space, p: MonotonicityParams, seed: u64) -> Result<Outcome> {
    let pairs = build_instances(space, &p.source, &p.target, p.n, p.instances, p.scale, seed)?;
    if p.plan.is_some() && p.source.is_none() {
        return Err(invalid("params.plan", "an explicit plan needs params.source and params.target"));
    }
    let mode = match p.samples {
        Some(n_samples) => CycleMode::Sampled { n_samples, seed },
        None => CycleMode::Exhaustive,
    };
    let (mut violations, mut worst, mut checked) = (0usize, f64::INFINITY, 0usize);
    for (mu, nu) in pairs.iter() {
        let plan = match &p.plan {
            Some(entries) => TransportPlan::new(entries.clone(), mu.clone(), nu.clone())
                .map_err(|e| invalid("params.plan", e.to_string()))?,
            None => solve_kantorovich_with(space, mu, nu, PivotRule::default())?.plan,
        };
        let r = check_cyclic_monotonicity(space, &plan, p.max_len, mode).map_err(|e| match e {
            Error::ParamOutOfRange { .. } => invalid("params.max_len", e.to_string()),
            e => e,
        })?;
        violations += r.violations;
        worst = worst.min(r.worst_slack);
        checked += r.cycles_checked;
    }
    let mut out = Outcome::new();
    out.push("instances", pairs.len() as f64);
    out.push("violations", violations as f64);
    out.push("worst_slack", worst);
    out.push("cycles_checked", checked as f64);
    out.require(violations == 0);
    Ok(out)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct IdentityParams {
    /// Nodes per side of the coarsest grid on `[0, 1]²`.
    #[serde(default = "five")]
    n: usize,
    /// Number of grids; each halves the pitch of the previous one.
    #[serde(default = "three")]
    levels: usize,
    /// Translation vector of the instance.
    #[serde(default = "unit_shift")]
    shift: [f64; 2],
    /// `C` in the bound `residual ≤ C·h`.
    #[serde(default = "unit")]
    constant: f64,
    /// Fraction of interior nodes that must satisfy the bound.
    #[serde(default = "coverage")]
    coverage: f64,
    #[serde(default = "min_order")]
    min_order: f64,
}

fn unit_shift() -> [f64; 2] {
    [1.0, 0.0]
}
fn coverage() -> f64 {
    0.95
}
fn min_order() -> f64 {
    0.9
}

/// Least-squares slope of `ln y` against `ln x`.
pub(crate) fn fitted_order(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Grid `μ` on `[0, 1]²`, `ν` its translate by `shift`; residuals of the
/// transport identity and of the Brenier form at interior nodes, per pitch.
pub(crate) fn identity(space: &Space, p: IdentityParams) -> Result<Outcome> {
    if !matches!(space.kind(), SpaceKind::Euclidean) || space.dim() != 2 {
        return Err(invalid("space", "transport-identity runs on the Euclidean plane"));
    }
    if p.n < 3 {
        return Err(invalid("params.n", "needs at least one interior node"));
    }
    if p.levels == 0 {
        return Err(invalid("params.levels", "must be positive"));
    }
    let finest = (p.n - 1) << (p.levels - 1);
    if (finest + 1) * (finest + 1) > crate::transport::MAX_SUPPORT {
        return Err(invalid("params.levels", format!("finest grid has {} nodes per side", finest + 1)));
    }
    let mut out = Outcome::new();
    let (mut pitches, mut maxima, mut fitted_constant) = (Vec::new(), Vec::new(), 0.0f64);
    for level in 0..p.levels {
        let grid = Grid::unit_square(((p.n - 1) << level) + 1);
        let h = grid.pitch;
        let points = grid.points();
        let shifted =
            points.iter().map(|x| Point::euclidean(vec![x.coords[0] + p.shift[0], x.coords[1] + p.shift[1]])).collect();
        let mu = DiscreteMeasure::uniform(space, points)?;
        let nu = DiscreteMeasure::uniform(space, shifted)?;
        let sol = solve_kantorovich_with(space, &mu, &nu, PivotRule::default())?;
        let map = match extract_monge_map(&sol.plan, tolerances::FLOW_ZERO) {
            MongeOutcome::Map { map, .. } => map,
            MongeOutcome::NotDeterministic { split_mass } => {
                return Err(Error::NotDeterministic { direction: crate::error::Direction::Forward, split_mass })
            }
        };
        let interior = grid.interior();
        let (mut worst, mut brenier, mut within) = (0.0f64, 0.0f64, 0usize);
        let mut sorted = Vec::with_capacity(interior.len());
        for &k in &interior {
            let r = verify_transport_identity(space, &grid, &sol.potentials.psi, &map, k)?;
            worst = worst.max(r.identity);
            brenier = brenier.max(r.brenier.unwrap_or(0.0));
            if r.identity <= p.constant * h {
                within += 1;
            }
            sorted.push(r.identity);
        }
        sorted.sort_by(f64::total_cmp);
        let q = sorted[((sorted.len() as f64 * p.coverage).ceil() as usize).clamp(1, sorted.len()) - 1];
        fitted_constant = fitted_constant.max(q / h);
        let fraction = within as f64 / interior.len() as f64;
        out.push(&format!("pitch_{level}"), h);
        out.push(&format!("residual_max_{level}"), worst);
        out.push(&format!("brenier_max_{level}"), brenier);
        out.push(&format!("fraction_within_{level}"), fraction);
        out.require(fraction >= p.coverage && brenier <= p.constant * h);
        pitches.push(h);
        maxima.push(worst);
    }
    out.push("fitted_constant", fitted_constant);
    let positive: Vec<usize> = (0..maxima.len()).filter(|&k| maxima[k] > 0.0).collect();
    if positive.len() >= 2 {
        let xs: Vec<f64> = positive.iter().map(|&k| pitches[k]).collect();
        let ys: Vec<f64> = positive.iter().map(|&k| maxima[k]).collect();
        let order = fitted_order(&xs, &ys);
        out.push("fitted_order", order);
        out.require(order >= p.min_order);
    } else if !positive.is_empty() {
        // A single nonzero residual cannot be fitted; a one-level run never can.
        out.require(p.levels == 1);
    }
    Ok(out)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct PolarParams {
    /// Explicit instance: `μ` and the images of its atoms under `s`.
    #[serde(default)]
    source: Option<MeasureSpec>,
    #[serde(default)]
    map: Option<Vec<Point>>,
    #[serde(default = "hundred")]
    instances: usize,
    #[serde(default = "ten")]
    n: usize,
    #[serde(default = "unit")]
    scale: f64,
}

fn hundred() -> usize {
    100
}
fn ten() -> usize {
    10
}

struct PolarCheck {
    residual: f64,
    inverse_gap: f64,
    preserving: bool,
    stable: bool,
    oracle: Option<bool>,
}

fn polar_instance(space: &Space, mu: &DiscreteMeasure, s: &TransportMap, perm: &[usize]) -> Result<PolarCheck> {
    let f = polar_factorize(space, mu, s)?;
    let nu = push_forward(space, mu, s)?;
    let (t, t_star) = inverse_map(space, mu, &nu)?;
    let mut inverse_gap: f64 = 0.0;
    for (i, x) in mu.points.iter().enumerate() {
        let j = nu.find(space, t.image(i)?).ok_or_else(|| Error::MapUndefined(format!("image of atom {i}")))?;
        inverse_gap = inverse_gap.max(space.distance_unchecked(t_star.image(j)?, x));
    }
    let preserving = verify_measure_preserving(space, mu, &f.u)?;

    let mu2 = mu.permuted(perm);
    let s2 = TransportMap::new(perm.iter().map(|&k| s.images[k].clone()).collect());
    let f2 = polar_factorize(space, &mu2, &s2)?;
    let stable = maps_agree(space, mu, &f.t, &mu2, &f2.t) && maps_agree(space, mu, &f.u, &mu2, &f2.u);

    let oracle = if oracle_applies(mu, &nu) {
        let (plan, _) = brute_force_oracle(space, mu, &nu)?;
        Some(match extract_monge_map(&plan, tolerances::FLOW_ZERO).into_map() {
            Some((map, _)) => maps_agree(space, mu, &f.t, mu, &map),
            None => false,
        })
    } else {
        None
    };
    Ok(PolarCheck { residual: f.residual, inverse_gap, preserving, stable, oracle })
}

pub(crate) fn polar(space: &Space, p: PolarParams, seed: u64) -> Result<Outcome> {
    let mut r = rng::stream(seed, "polar");
    let instances: Vec<(DiscreteMeasure, TransportMap)> = match (&p.source, &p.map) {
        (Some(src), Some(images)) => {
            let mu = src.build(space, "params.source")?;
            if images.len() != mu.len() {
                return Err(invalid("params.map", format!("{} images for {} atoms", images.len(), mu.len())));
            }
            vec![(mu, TransportMap::new(images.clone()))]
        }
        (Some(_), None) => return Err(invalid("params.map", "required with params.source")),
        (None, Some(_)) => return Err(invalid("params.source", "required with params.map")),
        (None, None) => {
            if p.n == 0 || p.instances == 0 {
                return Err(invalid(if p.n == 0 { "params.n" } else { "params.instances" }, "must be positive"));
            }
            (0..p.instances)
                .map(|_| {
                    let mu = uniform_measure(space, &mut r, p.n, p.scale)?;
                    let s = TransportMap::new(distinct_points(space, &mut r, p.n, p.scale));
                    Ok((mu, s))
                })
                .collect::<Result<_>>()?
        }
    };
    let (mut residual, mut inverse_gap): (f64, f64) = (0.0, 0.0);
    let (mut preserving, mut stable, mut oracle_ok, mut oracle_runs, mut failures) = (0, 0, 0, 0, 0);
    for (mu, s) in &instances {
        let perm = permutation(&mut r, mu.len());
        match polar_instance(space, mu, s, &perm) {
            Ok(c) => {
                residual = residual.max(c.residual);
                inverse_gap = inverse_gap.max(c.inverse_gap);
                preserving += c.preserving as usize;
                stable += c.stable as usize;
                if let Some(ok) = c.oracle {
                    oracle_runs += 1;
                    oracle_ok += ok as usize;
                }
            }
            Err(Error::NotDeterministic { .. } | Error::InverseMismatch { .. }) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    let count = instances.len();
    let mut out = Outcome::new();
    out.push("instances", count as f64);
    out.push("failures", failures as f64);
    out.push("max_residual", residual);
    out.push("max_inverse_gap", inverse_gap);
    out.push("measure_preserving", preserving as f64);
    out.push("reorder_stable", stable as f64);
    out.require(failures == 0 && preserving == count && stable == count);
    out.require(residual <= tolerances::METRIC && inverse_gap <= tolerances::METRIC);
    if oracle_runs > 0 {
        out.push("oracle_checked", oracle_runs as f64);
        out.push("oracle_agree", oracle_ok as f64);
        out.require(oracle_ok == oracle_runs);
    }
    Ok(out)
}
