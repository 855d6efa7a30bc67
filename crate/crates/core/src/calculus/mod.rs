//! Calculus along geodesics for the quadratic cost `c = d²/2`.

mod derivative;
mod directions;
mod shell;

pub use derivative::{default_derivative_schedule, geodesic_derivative, locate_on_geodesic, DerivativeEstimate};
pub use directions::{
    cost_directional, fermat_check, sample_directions, twist_test, FermatReport, TwistReport, DEFAULT_DIRECTIONS,
};
pub use shell::{eilenberg_estimate, region_diameter, zeta_positivity, EilenbergReport, Region, ZetaReport, BATCHES};

use crate::error::{check_unit_interval, Result};
use crate::geometry::{Geodesic, Point};
use crate::spaces::Space;

/// `c(x, y) = d(x, y)² / 2`.
pub fn cost(space: &Space, x: &Point, y: &Point) -> Result<f64> {
    let d = space.distance(x, y)?;
    Ok(0.5 * d * d)
}

/// `D_u c(u, v; γ) = (t − s) ℓ(γ)²` for `u = γ(t)`, `v = γ(s)`.
pub fn cost_derivative_closed(gamma: &Geodesic, t: f64, s: f64) -> Result<f64> {
    check_unit_interval("t", t)?;
    check_unit_interval("s", s)?;
    Ok((t - s) * gamma.length() * gamma.length())
}

/// The point of `γ` at arc-length `min(d(γ(0), x), ℓ(γ))` from `γ(0)`.
pub fn radial_projection(space: &Space, gamma: &Geodesic, x: &Point) -> Result<Point> {
    let r = space.distance(gamma.start(), x)?;
    space.normalize(&gamma.at_arc_length(r.min(gamma.length())))
}
