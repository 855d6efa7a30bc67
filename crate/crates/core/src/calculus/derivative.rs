use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Geodesic, Point};
use crate::spaces::Space;
use crate::tolerances;

/// One-sided and two-sided derivative of a function along a geodesic, in
/// units of the `[0, 1]` parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub one_sided_plus: Option<f64>,
    pub one_sided_minus: Option<f64>,
    pub step: f64,
    pub differentiable: bool,
}

/// `h_k = 2^{-4-k}` for `k = 0..=10`: arc-length steps `ℓ(γ)/16` halved ten times.
pub fn default_derivative_schedule() -> Vec<f64> {
    (0..=10).map(|k| 0.0625 * 0.5f64.powi(k)).collect()
}

/// Parameter of `x` on `γ`, or `PointNotOnGeodesic`.
pub fn locate_on_geodesic(space: &Space, gamma: &Geodesic, x: &Point) -> Result<f64> {
    let from_start = space.distance(gamma.start(), x)?;
    if gamma.length() == 0.0 {
        return if from_start <= tolerances::METRIC {
            Ok(0.0)
        } else {
            Err(Error::PointNotOnGeodesic { distance: from_start })
        };
    }
    let s = (from_start / gamma.length()).clamp(0.0, 1.0);
    let distance = space.distance_unchecked(&gamma.eval(s), x);
    if distance > tolerances::METRIC {
        return Err(Error::PointNotOnGeodesic { distance });
    }
    Ok(s)
}

/// Difference quotients of `f ∘ γ` at the parameter of `x`.
///
/// Each side uses the two smallest schedule steps that stay inside `[0, 1]`
/// and cancels the first-order error by one Richardson step (`2 q(h) − q(2h)`
/// for halving schedules); with a single admissible step the plain quotient is
/// used.
pub fn geodesic_derivative<F>(
    space: &Space,
    f: F,
    x: &Point,
    gamma: &Geodesic,
    schedule: &[f64],
) -> Result<DerivativeEstimate>
where
    F: Fn(&Point) -> f64,
{
    if schedule.is_empty() || schedule.iter().any(|h| !(*h > 0.0)) || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::ScheduleTooShort);
    }
    let s = locate_on_geodesic(space, gamma, x)?;
    let f0 = f(&gamma.eval(s));
    let side = |sign: f64| -> Option<(f64, f64)> {
        let quotient = |h: f64| (f(&gamma.eval(s + sign * h)) - f0) / h;
        let fits: Vec<f64> = schedule
            .iter()
            .copied()
            .filter(|h| {
                let t = s + sign * h;
                (0.0..=1.0).contains(&t)
            })
            .collect();
        match fits.as_slice() {
            [] => None,
            [h] => Some((sign * quotient(*h), *h)),
            [.., h2, h] => {
                let r = h2 / h;
                Some((sign * (r * quotient(*h) - quotient(*h2)) / (r - 1.0), *h))
            }
        }
    };
    let plus = side(1.0);
    let minus = side(-1.0);
    let step = plus.or(minus).map(|p| p.1).unwrap_or(0.0);
    let (dp, dm) = (plus.map(|p| p.0), minus.map(|p| p.0));
    let (value, differentiable) = match (dp, dm) {
        (Some(p), Some(m)) => {
            let ok = (p - m).abs() < tolerances::DIFFERENTIABILITY * (1.0 + p.abs() + m.abs());
            (if ok { 0.5 * (p + m) } else { p }, ok)
        }
        (Some(p), None) => (p, false),
        (None, Some(m)) => (m, false),
        (None, None) => (0.0, false),
    };
    Ok(DerivativeEstimate { value, one_sided_plus: dp, one_sided_minus: dm, step, differentiable })
}
