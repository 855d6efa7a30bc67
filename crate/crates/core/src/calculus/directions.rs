use serde::Serialize;

use super::derivative::{default_derivative_schedule, geodesic_derivative};
use super::cost;
use crate::error::{Error, Result};
use crate::geometry::{extend, Geodesic, Point};
use crate::spaces::{Space, SpaceKind};
use crate::tolerances;

/// Default number of equiangular directions on flat charts.
pub const DEFAULT_DIRECTIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwistReport {
    #[serde(skip)]
    pub distinguishing_geodesic: Option<Geodesic>,
    pub max_gap: f64,
    pub twist_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FermatReport {
    pub min_directional: f64,
    pub two_sided_zero: bool,
    /// Directions whose extension through the point exists.
    pub two_sided_checked: usize,
}

/// Short geodesics issuing from `x`, at most `length` long.
///
/// Two-dimensional Euclidean space and book pages get `n` equiangular
/// directions (a spine point gets a half-turn fan in every page); other
/// Euclidean dimensions get the `2d` coordinate directions; trees get one
/// direction per incident edge. Directions are shortened so they stay inside
/// the chart of `x`.
pub fn sample_directions(space: &Space, x: &Point, n: usize, length: f64) -> Result<Vec<Geodesic>> {
    let x = space.normalize(x)?;
    let mut out = Vec::new();
    match space.kind() {
        SpaceKind::Euclidean if space.dim() == 2 => {
            for k in 0..n {
                let a = std::f64::consts::TAU * k as f64 / n as f64;
                let y = Point::euclidean(vec![x.coords[0] + length * a.cos(), x.coords[1] + length * a.sin()]);
                out.push(space.geodesic(&x, &y)?);
            }
        }
        SpaceKind::Euclidean => {
            for i in 0..space.dim() {
                for sign in [1.0, -1.0] {
                    let mut c = x.coords.clone();
                    c[i] += sign * length;
                    out.push(space.geodesic(&x, &Point::euclidean(c))?);
                }
            }
        }
        SpaceKind::OpenBook { pages } => {
            let (u, v) = (x.coords[0], x.coords[1]);
            if u > 0.0 {
                for k in 0..n {
                    let a = std::f64::consts::TAU * k as f64 / n as f64;
                    let (du, dv) = (a.cos(), a.sin());
                    let reach = if du < 0.0 { length.min(u / -du) } else { length };
                    out.push(space.geodesic(&x, &Point::page(x.chart, u + reach * du, v + reach * dv))?);
                }
            } else {
                let fan = (n / 2).max(2);
                for page in 0..*pages {
                    for k in 0..=fan {
                        let a = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * k as f64 / fan as f64;
                        let y = Point::page(page, (length * a.cos()).max(0.0), v + length * a.sin());
                        out.push(space.geodesic(&x, &y)?);
                    }
                }
            }
        }
        SpaceKind::Tree(tree) => {
            let e = tree.edges()[x.chart];
            match tree.vertex_of(&x) {
                Some(v) => {
                    for &f in tree.incident(v) {
                        let edge = tree.edges()[f];
                        let s = edge.coord_of(v);
                        let reach = length.min(edge.length);
                        let t = if v == edge.a { s + reach } else { s - reach };
                        out.push(space.geodesic(&x, &Point::on_edge(f, t))?);
                    }
                }
                None => {
                    let s = x.coords[0];
                    out.push(space.geodesic(&x, &Point::on_edge(x.chart, s - length.min(s)))?);
                    out.push(space.geodesic(&x, &Point::on_edge(x.chart, s + length.min(e.length - s)))?);
                }
            }
        }
    }
    Ok(out)
}

fn check_origin(space: &Space, x: &Point, directions: &[Geodesic]) -> Result<()> {
    for g in directions {
        let gap = space.distance(g.start(), x)?;
        if gap > tolerances::METRIC {
            return Err(Error::OriginMismatch { gap });
        }
    }
    Ok(())
}

/// `D_x c(x, y; γ)` for `γ` issuing from `x`.
pub fn cost_directional(space: &Space, y: &Point, gamma: &Geodesic) -> Result<f64> {
    let est = geodesic_derivative(
        space,
        |p| cost(space, p, y).unwrap_or(f64::NAN),
        gamma.start(),
        gamma,
        &default_derivative_schedule(),
    )?;
    Ok(est.one_sided_plus.unwrap_or(est.value))
}

/// Looks for a direction at `x` along which `c(·, y1)` and `c(·, y2)` have
/// different derivatives.
pub fn twist_test(space: &Space, x: &Point, y1: &Point, y2: &Point, directions: &[Geodesic]) -> Result<TwistReport> {
    check_origin(space, x, directions)?;
    let mut max_gap = 0.0;
    let mut best = None;
    for g in directions {
        if g.length() == 0.0 {
            continue;
        }
        let gap = (cost_directional(space, y1, g)? - cost_directional(space, y2, g)?).abs();
        if gap > max_gap {
            max_gap = gap;
            best = Some(g);
        }
    }
    let twist_holds = max_gap > tolerances::TWIST_GAP;
    Ok(TwistReport {
        distinguishing_geodesic: if twist_holds { best.cloned() } else { None },
        max_gap,
        twist_holds,
    })
}

/// Directional derivatives of `f` at a candidate minimizer.
///
/// For every direction that extends backwards through `x_star` by its own
/// length, the derivative along the extended geodesic must vanish on both
/// sides within `tol` for `two_sided_zero` to hold.
pub fn fermat_check<F>(space: &Space, f: F, x_star: &Point, directions: &[Geodesic], tol: f64) -> Result<FermatReport>
where
    F: Fn(&Point) -> f64,
{
    check_origin(space, x_star, directions)?;
    let schedule = default_derivative_schedule();
    let mut min_directional = f64::INFINITY;
    let mut two_sided_zero = true;
    let mut two_sided_checked = 0;
    for g in directions {
        if g.length() == 0.0 {
            continue;
        }
        let est = geodesic_derivative(space, &f, g.start(), g, &schedule)?;
        let d = est.one_sided_plus.unwrap_or(est.value);
        min_directional = min_directional.min(d);
        match extend(space, &g.reversed(), g.length()) {
            Ok(line) => {
                two_sided_checked += 1;
                let mid = line.eval(0.5);
                let two = geodesic_derivative(space, &f, &mid, &line, &schedule)?;
                let vanish = |d: Option<f64>| d.is_none_or(|d| d.abs() < tol);
                if !(vanish(two.one_sided_plus) && vanish(two.one_sided_minus)) {
                    two_sided_zero = false;
                }
            }
            Err(Error::NotExtendable { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(FermatReport { min_directional, two_sided_zero, two_sided_checked })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_twist_distinguishes() {
        let e2 = Space::euclidean(2).unwrap();
        let x = Point::euclidean(vec![0.0, 0.0]);
        let dirs = vec![
            e2.geodesic(&x, &Point::euclidean(vec![1.0, 0.0])).unwrap(),
            e2.geodesic(&x, &Point::euclidean(vec![0.0, 1.0])).unwrap(),
        ];
        let r = twist_test(&e2, &x, &Point::euclidean(vec![1.0, 0.0]), &Point::euclidean(vec![0.0, 1.0]), &dirs).unwrap();
        assert!(r.twist_holds);
        assert!((r.max_gap - 1.0).abs() < 1e-6);
        let same = twist_test(&e2, &x, &Point::euclidean(vec![1.0, 0.0]), &Point::euclidean(vec![1.0, 0.0]), &dirs).unwrap();
        assert_eq!(same.max_gap, 0.0);
        assert!(same.distinguishing_geodesic.is_none());
    }

    #[test]
    fn tripod_same_gate_targets_are_indistinguishable() {
        let tri = Space::tripod();
        let x = Point::on_edge(0, 0.5);
        let (y1, y2) = (Point::on_edge(1, 0.3), Point::on_edge(2, 0.3));
        let mut dirs = sample_directions(&tri, &x, DEFAULT_DIRECTIONS, 1.0).unwrap();
        dirs.push(tri.geodesic(&x, &y1).unwrap());
        dirs.push(tri.geodesic(&x, &y2).unwrap());
        let r = twist_test(&tri, &x, &y1, &y2, &dirs).unwrap();
        assert!(r.max_gap < 1e-9);
        assert!(!r.twist_holds);
    }

    #[test]
    fn fermat_at_smooth_minimum_and_leaf() {
        let e2 = Space::euclidean(2).unwrap();
        let y = Point::euclidean(vec![0.3, 0.4]);
        let dirs = sample_directions(&e2, &y, 16, 0.5).unwrap();
        let r = fermat_check(&e2, |p| cost(&e2, p, &y).unwrap(), &y, &dirs, 1e-6).unwrap();
        assert!(r.min_directional.abs() < 1e-9);
        assert!(r.two_sided_zero);
        assert_eq!(r.two_sided_checked, 16);

        let tri = Space::tripod();
        let leaf = Point::on_edge(0, 1.0);
        let dirs = sample_directions(&tri, &leaf, DEFAULT_DIRECTIONS, 1.0).unwrap();
        let r = fermat_check(&tri, |p| tri.distance(p, &leaf).unwrap(), &leaf, &dirs, 1e-6).unwrap();
        assert!((r.min_directional - 1.0).abs() < 1e-9);
        assert!(r.two_sided_zero);
        assert_eq!(r.two_sided_checked, 0);
    }

    #[test]
    fn fermat_at_non_minimizer() {
        let e2 = Space::euclidean(2).unwrap();
        let (x, y) = (Point::euclidean(vec![0.0, 0.0]), Point::euclidean(vec![1.0, 1.0]));
        let dirs = vec![e2.geodesic(&x, &y).unwrap()];
        let r = fermat_check(&e2, |p| cost(&e2, p, &y).unwrap(), &x, &dirs, 1e-6).unwrap();
        assert!((r.min_directional + 2.0).abs() < 1e-6);
    }

    #[test]
    fn spine_directions_cover_every_page() {
        let book = Space::open_book(3).unwrap();
        let dirs = sample_directions(&book, &Point::page(1, 0.0, 0.0), 8, 1.0).unwrap();
        for page in 0..3 {
            assert!(dirs.iter().any(|g| g.end().chart == page && g.end().coords[0] > 0.5));
        }
    }

    #[test]
    fn origin_mismatch() {
        let e2 = Space::euclidean(2).unwrap();
        let x = Point::euclidean(vec![0.0, 0.0]);
        let g = e2.geodesic(&Point::euclidean(vec![1.0, 0.0]), &x).unwrap();
        assert!(matches!(twist_test(&e2, &x, &x, &x, &[g]), Err(Error::OriginMismatch { .. })));
    }
}
