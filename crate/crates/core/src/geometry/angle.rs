use serde::Serialize;

use super::{Geodesic, Point};
use crate::error::{check_unit_interval, Error, Result};
use crate::spaces::Space;
use crate::tolerances;

/// Estimate of the Alexandrov angle between two geodesics at their origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleEstimate {
    pub value: f64,
    pub bracket_low: f64,
    pub bracket_high: f64,
    pub converged: bool,
}

/// Angle of the Euclidean comparison triangle between sides `a` and `b`,
/// opposite side `c`.
///
/// Uses the half-angle form of the law of cosines, which equals
/// `acos((a² + b² − c²) / 2ab)` but keeps full precision near 0 and π.
pub fn comparison_angle(a: f64, b: f64, c: f64) -> Result<f64> {
    if a.is_nan() || b.is_nan() || c.is_nan() || c < 0.0 {
        return Err(Error::NotATriangle { a, b, c });
    }
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::DegenerateTriangle);
    }
    let slack = tolerances::TRIANGLE_SLACK;
    if c > a + b + slack || a > b + c + slack || b > a + c + slack {
        return Err(Error::NotATriangle { a, b, c });
    }
    // Near a flat triangle the angle moves like the square root of the side
    // error, so rounding in `c` alone would show up around 1e-8. Triangles
    // degenerate up to a few ulps are snapped to 0 or π.
    let ulps = 8.0 * f64::EPSILON * (a + b + c);
    if a + b - c <= ulps {
        return Ok(std::f64::consts::PI);
    }
    if c - (a - b).abs() <= ulps {
        return Ok(0.0);
    }
    let num = ((c - a + b).max(0.0) * (c + a - b).max(0.0)).sqrt();
    let den = ((a + b - c).max(0.0) * (a + b + c)).sqrt();
    Ok((2.0 * num.atan2(den)).clamp(0.0, std::f64::consts::PI))
}

/// `s_0 = min(ℓγ, ℓη) / 4`, halved 12 times (13 entries, arc-length units).
pub fn default_angle_schedule(gamma: &Geodesic, eta: &Geodesic) -> Vec<f64> {
    let s0 = gamma.length().min(eta.length()) / 4.0;
    (0..=12).map(|k| s0 * 0.5f64.powi(k)).collect()
}

/// Comparison angles at `γ(s), η(s)` along a shrinking arc-length schedule.
///
/// The sequence is non-increasing as `s ↓ 0`, so the last value is reported
/// with the bracket `[last, first]`.
pub fn alexandrov_angle(
    space: &Space,
    gamma: &Geodesic,
    eta: &Geodesic,
    schedule: &[f64],
) -> Result<AngleEstimate> {
    let gap = space.distance(gamma.start(), eta.start())?;
    if gap > tolerances::METRIC {
        return Err(Error::OriginMismatch { gap });
    }
    if gamma.length() == 0.0 || eta.length() == 0.0 {
        return Err(Error::DegenerateGeodesic);
    }
    if schedule.len() < 2 || schedule.iter().any(|s| !(*s > 0.0)) || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::ScheduleTooShort);
    }
    let values = comparison_angles(space, gamma, eta, schedule)?;
    let last = values[values.len() - 1];
    let previous = values[values.len() - 2];
    Ok(AngleEstimate {
        value: last,
        bracket_low: last,
        bracket_high: values[0].max(last),
        converged: (last - previous).abs() < tolerances::ANGLE_CONVERGENCE,
    })
}

/// Comparison angles at `γ(s), η(s)` for every `s` in `schedule`.
pub fn comparison_angles(space: &Space, gamma: &Geodesic, eta: &Geodesic, schedule: &[f64]) -> Result<Vec<f64>> {
    schedule
        .iter()
        .map(|&s| {
            // Measured sides, not `s`: they share the rounding of `c`, so a
            // flat triangle stays flat when the origin sits far from zero.
            let (p, q) = (gamma.at_arc_length(s), eta.at_arc_length(s));
            let a = space.distance_unchecked(gamma.start(), &p);
            let b = space.distance_unchecked(gamma.start(), &q);
            let c = space.distance_unchecked(&p, &q);
            comparison_angle(a, b, c.min(a + b))
        })
        .collect()
}

/// `(1−t)d(x,z)² + t·d(y,z)² − t(1−t)d(x,y)² − d(x_t,z)²`; non-negative in CAT(0).
pub fn cat0_defect(space: &Space, x: &Point, y: &Point, z: &Point, t: f64) -> Result<f64> {
    check_unit_interval("t", t)?;
    let xt = space.convex_combination(x, y, t)?;
    let dxz = space.distance(x, z)?;
    let dyz = space.distance(y, z)?;
    let dxy = space.distance(x, y)?;
    let dtz = space.distance_unchecked(&xt, z);
    Ok((1.0 - t) * dxz * dxz + t * dyz * dyz - t * (1.0 - t) * dxy * dxy - dtz * dtz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    #[test]
    fn comparison_angle_examples() {
        assert!((comparison_angle(1.0, 1.0, 2f64.sqrt()).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(comparison_angle(1.0, 1.0, 2.0).unwrap(), PI);
        assert!((comparison_angle(1.0, 1.0, 1.0).unwrap() - FRAC_PI_3).abs() < 1e-15);
        assert_eq!(comparison_angle(1.0, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn comparison_angle_matches_law_of_cosines() {
        for &(a, b, c) in &[(3.0f64, 4.0, 5.0), (2.0, 3.0, 4.0), (1.0, 2.0, 1.5), (0.3, 0.7, 0.9)] {
            let expected = ((a * a + b * b - c * c) / (2.0 * a * b)).acos();
            assert!((comparison_angle(a, b, c).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn comparison_angle_errors() {
        assert!(matches!(comparison_angle(0.0, 1.0, 1.0), Err(Error::DegenerateTriangle)));
        assert!(matches!(comparison_angle(1.0, 1.0, 3.0), Err(Error::NotATriangle { .. })));
        assert!(comparison_angle(1.0, 1.0, 2.0 + 5e-13).is_ok());
    }

    #[test]
    fn tripod_defect_is_two() {
        let tri = Space::tripod();
        let (x, y, z) = (Point::on_edge(0, 1.0), Point::on_edge(1, 1.0), Point::on_edge(2, 1.0));
        assert!((cat0_defect(&tri, &x, &y, &z, 0.5).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn euclidean_defect_vanishes() {
        let e2 = Space::euclidean(2).unwrap();
        let d = cat0_defect(
            &e2,
            &Point::euclidean(vec![0.0, 0.0]),
            &Point::euclidean(vec![2.0, 0.0]),
            &Point::euclidean(vec![1.0, 1.0]),
            0.5,
        )
        .unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn schedule_validation() {
        let e2 = Space::euclidean(2).unwrap();
        let o = Point::euclidean(vec![0.0, 0.0]);
        let g = e2.geodesic(&o, &Point::euclidean(vec![1.0, 0.0])).unwrap();
        let h = e2.geodesic(&Point::euclidean(vec![0.1, 0.0]), &Point::euclidean(vec![0.0, 1.0])).unwrap();
        assert!(matches!(alexandrov_angle(&e2, &g, &g, &[0.1]), Err(Error::ScheduleTooShort)));
        assert!(matches!(alexandrov_angle(&e2, &g, &h, &[0.1, 0.05]), Err(Error::OriginMismatch { .. })));
    }
}
