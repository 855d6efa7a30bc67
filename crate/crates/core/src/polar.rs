//! Inverse transport maps and the polar factorization `s = T∘u` on atoms.

use serde::{Deserialize, Serialize};

use crate::error::{Direction, Error, Result};
use crate::geometry::Point;
use crate::spaces::Space;
use crate::tolerances;
use crate::transport::{extract_monge_map, solve_kantorovich, DiscreteMeasure, MongeOutcome, TransportMap};

/// `s = T∘u` with `T` optimal from `μ` to `s#μ` and `u` measure preserving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    #[serde(rename = "T")]
    pub t: TransportMap,
    pub u: TransportMap,
    /// `max_i d(s(x_i), T(u(x_i)))`.
    pub residual: f64,
}

/// Optimal maps `T: μ → ν` and `T*: ν → μ`, checked to be mutually inverse on atoms.
pub fn inverse_map(space: &Space, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(TransportMap, TransportMap)> {
    let forward = solve_map(space, mu, nu, Direction::Forward)?;
    let backward = solve_map(space, nu, mu, Direction::Backward)?;
    let mut gap: f64 = 0.0;
    for (i, x) in mu.points.iter().enumerate() {
        let j = nu.find(space, forward.image(i)?).ok_or_else(|| Error::MapUndefined(format!("image of atom {i}")))?;
        gap = gap.max(space.distance_unchecked(backward.image(j)?, x));
    }
    if gap > tolerances::METRIC {
        return Err(Error::InverseMismatch { gap });
    }
    Ok((forward, backward))
}

fn solve_map(space: &Space, a: &DiscreteMeasure, b: &DiscreteMeasure, direction: Direction) -> Result<TransportMap> {
    let sol = solve_kantorovich(space, a, b)?;
    match extract_monge_map(&sol.plan, tolerances::FLOW_ZERO) {
        MongeOutcome::Map { map, .. } => Ok(map),
        MongeOutcome::NotDeterministic { split_mass } => Err(Error::NotDeterministic { direction, split_mass }),
    }
}

/// `ν = s#μ`, merging images that coincide and summing their weights.
pub fn push_forward(space: &Space, mu: &DiscreteMeasure, s: &TransportMap) -> Result<DiscreteMeasure> {
    if s.len() != mu.len() {
        return Err(Error::MapUndefined(format!("map has {} images for {} atoms", s.len(), mu.len())));
    }
    let mut points: Vec<Point> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (img, w) in s.images.iter().zip(&mu.weights) {
        let img = space.normalize(img)?;
        match points.iter().position(|q| space.same_point(q, &img)) {
            Some(k) => weights[k] += w,
            None => {
                points.push(img);
                weights.push(*w);
            }
        }
    }
    DiscreteMeasure::new(space, points, weights)
}

/// Factors `s` as `T∘u` with `T` the optimal map onto `s#μ` and `u = T*∘s`.
pub fn polar_factorize(space: &Space, mu: &DiscreteMeasure, s: &TransportMap) -> Result<Factorization> {
    let nu = push_forward(space, mu, s)?;
    let (t, t_star) = inverse_map(space, mu, &nu)?;
    let mut u = Vec::with_capacity(mu.len());
    for img in &s.images {
        let j = nu.find(space, img).ok_or_else(|| Error::MapUndefined("image missing from s#μ".into()))?;
        u.push(t_star.image(j)?.clone());
    }
    let mut residual: f64 = 0.0;
    for (i, ui) in u.iter().enumerate() {
        let k = mu.find(space, ui).ok_or_else(|| Error::MapUndefined(format!("u sends atom {i} off the support")))?;
        residual = residual.max(space.distance_unchecked(s.image(i)?, t.image(k)?));
    }
    Ok(Factorization { t, u: TransportMap::new(u), residual })
}

/// Whether `u` permutes the atoms of `μ` and preserves every weight.
pub fn verify_measure_preserving(space: &Space, mu: &DiscreteMeasure, u: &TransportMap) -> Result<bool> {
    if u.len() != mu.len() {
        return Err(Error::MapUndefined(format!("map has {} images for {} atoms", u.len(), mu.len())));
    }
    let mut hit = vec![false; mu.len()];
    for (i, img) in u.images.iter().enumerate() {
        let Some(k) = mu.find(space, img) else { return Ok(false) };
        if hit[k] || (mu.weights[k] - mu.weights[i]).abs() > tolerances::WEIGHT_SUM {
            return Ok(false);
        }
        hit[k] = true;
    }
    Ok(true)
}

/// Whether two maps defined on listings of the same atoms send every atom to
/// the same point.
pub fn maps_agree(space: &Space, mu_a: &DiscreteMeasure, a: &TransportMap, mu_b: &DiscreteMeasure, b: &TransportMap) -> bool {
    if mu_a.len() != mu_b.len() || a.len() != mu_a.len() || b.len() != mu_b.len() {
        return false;
    }
    mu_a.points.iter().zip(&a.images).all(|(x, ax)| match mu_b.find(space, x) {
        Some(k) => space.same_point(ax, &b.images[k]),
        None => false,
    })
}
