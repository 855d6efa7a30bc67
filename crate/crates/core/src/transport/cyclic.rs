use itertools::Itertools;
use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use super::TransportPlan;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rng;
use crate::spaces::Space;
use crate::tolerances;

/// Exhaustive checks may visit at most this many support subsets of size `max_len`.
pub const MAX_TUPLES: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleMode {
    /// Every cyclic arrangement of every subset of support pairs.
    Exhaustive,
    /// `n_samples` random cycles of random length in `2..=max_len`.
    Sampled { n_samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleReport {
    pub violations: usize,
    /// Smallest `Σ c(x_i, y_{i+1}) − Σ c(x_i, y_i)` seen (0 when nothing was checked).
    pub worst_slack: f64,
    pub cycles_checked: usize,
}

/// `Σ c(x_i, y_{i+1}) − Σ c(x_i, y_i)` for the pairs `(x_i, y_i)` taken in order.
pub fn cycle_slack(space: &Space, pairs: &[(Point, Point)]) -> f64 {
    let k = pairs.len();
    let c = |x: &Point, y: &Point| {
        let d = space.distance_unchecked(x, y);
        0.5 * d * d
    };
    (0..k)
        .map(|i| c(&pairs[i].0, &pairs[(i + 1) % k].1) - c(&pairs[i].0, &pairs[i].1))
        .sum()
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Checks `Σ c(x_i, y_i) ≤ Σ c(x_i, y_{i+1})` on cycles of support pairs of
/// length `2..=max_len`.
pub fn check_cyclic_monotonicity(space: &Space, plan: &TransportPlan, max_len: usize, mode: CycleMode) -> Result<CycleReport> {
    if max_len < 2 {
        return Err(Error::ParamOutOfRange { name: "max_len", value: max_len as f64 });
    }
    let support: Vec<(usize, usize)> = plan.entries.iter().map(|&(i, j, _)| (i, j)).collect();
    let p = support.len();
    let x = |s: usize| &plan.source.points[support[s].0];
    let y = |s: usize| &plan.target.points[support[s].1];
    // Costs between every support source and support target.
    let cost: Vec<f64> = (0..p * p)
        .map(|k| {
            let d = space.distance_unchecked(x(k / p), y(k % p));
            0.5 * d * d
        })
        .collect();
    let slack = |cycle: &[usize]| -> f64 {
        let k = cycle.len();
        (0..k).map(|i| cost[cycle[i] * p + cycle[(i + 1) % k]] - cost[cycle[i] * p + cycle[i]]).sum()
    };

    let mut report = CycleReport { violations: 0, worst_slack: f64::INFINITY, cycles_checked: 0 };
    let mut record = |s: f64| {
        report.cycles_checked += 1;
        report.worst_slack = report.worst_slack.min(s);
        if -s > tolerances::CYCLE_SLACK {
            report.violations += 1;
        }
    };

    match mode {
        CycleMode::Exhaustive => {
            let count = binomial(p, max_len.min(p));
            if count > MAX_TUPLES {
                return Err(Error::TooManyTuples { count, cap: MAX_TUPLES });
            }
            let mut cycle = Vec::with_capacity(max_len);
            for k in 2..=max_len.min(p) {
                for subset in (0..p).combinations(k) {
                    // Fix the first element; every order of the rest is a distinct cycle.
                    for rest in subset[1..].iter().copied().permutations(k - 1) {
                        cycle.clear();
                        cycle.push(subset[0]);
                        cycle.extend(rest);
                        record(slack(&cycle));
                    }
                }
            }
        }
        CycleMode::Sampled { n_samples, seed } => {
            if p >= 2 {
                let mut r = rng::stream(seed, "monotonicity");
                let top = max_len.min(p);
                for _ in 0..n_samples {
                    let k = r.random_range(2..=top);
                    let mut cycle = index::sample(&mut r, p, k).into_vec();
                    cycle.sort_unstable();
                    let tail = &mut cycle[1..];
                    for i in (1..tail.len()).rev() {
                        tail.swap(i, r.random_range(0..=i));
                    }
                    record(slack(&cycle));
                }
            }
        }
    }
    if report.cycles_checked == 0 {
        report.worst_slack = 0.0;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::DiscreteMeasure;

    fn line_plan(entries: Vec<(usize, usize, f64)>) -> (Space, TransportPlan) {
        let e1 = Space::euclidean(1).unwrap();
        let m = |xs: &[f64]| DiscreteMeasure::uniform(&e1, xs.iter().map(|&x| Point::euclidean(vec![x])).collect()).unwrap();
        let plan = TransportPlan::new(entries, m(&[0.0, 1.0]), m(&[2.0, 3.0])).unwrap();
        (e1, plan)
    }

    #[test]
    fn optimal_line_plan_passes() {
        let (e1, plan) = line_plan(vec![(0, 0, 0.5), (1, 1, 0.5)]);
        let r = check_cyclic_monotonicity(&e1, &plan, 2, CycleMode::Exhaustive).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.cycles_checked, 1);
        // 4 ≤ 5 in units of the cost: c(0,3) + c(1,2) − c(0,2) − c(1,3) = 5 − 4.
        assert!((r.worst_slack - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swapped_line_plan_fails_once() {
        let (e1, plan) = line_plan(vec![(0, 1, 0.5), (1, 0, 0.5)]);
        let r = check_cyclic_monotonicity(&e1, &plan, 2, CycleMode::Exhaustive).unwrap();
        assert_eq!(r.violations, 1);
        assert!((r.worst_slack + 1.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_pair_has_zero_slack() {
        let e1 = Space::euclidean(1).unwrap();
        let pair = (Point::euclidean(vec![0.0]), Point::euclidean(vec![3.0]));
        assert_eq!(cycle_slack(&e1, &[pair.clone(), pair.clone(), pair]), 0.0);
    }

    #[test]
    fn cycle_counts_and_caps() {
        assert_eq!(binomial(30, 3), 4060);
        assert_eq!(binomial(5, 7), 0);
        let e1 = Space::euclidean(1).unwrap();
        let n = 200;
        let pts: Vec<Point> = (0..n).map(|i| Point::euclidean(vec![i as f64])).collect();
        let m = DiscreteMeasure::uniform(&e1, pts).unwrap();
        let plan = TransportPlan::new((0..n).map(|i| (i, i, 1.0 / n as f64)).collect(), m.clone(), m).unwrap();
        assert!(matches!(
            check_cyclic_monotonicity(&e1, &plan, 4, CycleMode::Exhaustive),
            Err(Error::TooManyTuples { .. })
        ));
        let r = check_cyclic_monotonicity(&e1, &plan, 4, CycleMode::Sampled { n_samples: 500, seed: 1 }).unwrap();
        assert_eq!(r.cycles_checked, 500);
        assert_eq!(r.violations, 0);
    }
}
