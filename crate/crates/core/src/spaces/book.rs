//! The open book: `k` closed half-planes `{(u, v) : u >= 0}` glued along the
//! spine `u = 0`.

use crate::error::{Error, Result};
use crate::geometry::{euclid, Piece, Point};

const COORD_SLACK: f64 = 1e-12;

pub(crate) fn validate(pages: usize, p: &Point) -> Result<()> {
    if p.chart >= pages {
        return Err(Error::InvalidPoint(format!("page {} of a {pages}-page book", p.chart)));
    }
    match p.coords.as_slice() {
        [u, v] if u.is_finite() && v.is_finite() && *u >= -COORD_SLACK => Ok(()),
        [u, _] if *u < 0.0 => Err(Error::InvalidPoint(format!("u = {u} is negative"))),
        [_, _] => Err(Error::InvalidPoint("non-finite page coordinate".into())),
        c => Err(Error::InvalidPoint(format!("page points need 2 coordinates, got {}", c.len()))),
    }
}

/// Spine points move to page 0; `u` is clamped at 0.
pub(crate) fn normalize(p: &Point) -> Point {
    let (u, v) = (p.coords[0], p.coords[1]);
    if u <= COORD_SLACK {
        Point::page(0, 0.0, v)
    } else {
        Point::page(p.chart, u, v)
    }
}

fn uv(p: &Point) -> (f64, f64) {
    (p.coords[0].max(0.0), p.coords[1])
}

pub(crate) fn distance(p: &Point, q: &Point) -> f64 {
    let ((u1, v1), (u2, v2)) = (uv(p), uv(q));
    if p.chart == q.chart {
        euclid(&[u1, v1], &[u2, v2])
    } else {
        (u1 + u2).hypot(v1 - v2)
    }
}

/// Height at which the geodesic between different pages crosses the spine.
pub(crate) fn spine_crossing(p: &Point, q: &Point) -> f64 {
    let ((u1, v1), (u2, v2)) = (uv(p), uv(q));
    if u1 + u2 == 0.0 {
        return v1;
    }
    v1 + u1 * (v2 - v1) / (u1 + u2)
}

pub(crate) fn geodesic_pieces(p: &Point, q: &Point) -> Vec<Piece> {
    let ((u1, v1), (u2, v2)) = (uv(p), uv(q));
    if p.chart == q.chart || u1 == 0.0 || u2 == 0.0 {
        // One of the points is on the spine, so the whole segment fits in the
        // other point's page.
        let chart = if u1 > 0.0 { p.chart } else { q.chart };
        return vec![Piece::new(chart, vec![u1, v1], vec![u2, v2])];
    }
    let w = spine_crossing(p, q);
    vec![
        Piece::new(p.chart, vec![u1, v1], vec![0.0, w]),
        Piece::new(q.chart, vec![0.0, w], vec![u2, v2]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_lies_on_the_unfolded_segment() {
        let (p, q) = (Point::page(0, 1.0, 0.0), Point::page(2, 3.0, 4.0));
        let w = spine_crossing(&p, &q);
        let s = Point::page(0, 0.0, w);
        assert!((distance(&p, &s) + distance(&s, &q) - distance(&p, &q)).abs() < 1e-12);
        assert_eq!(geodesic_pieces(&p, &q).len(), 2);
    }

    #[test]
    fn spine_endpoint_stays_in_one_page() {
        let pieces = geodesic_pieces(&Point::page(0, 0.0, 1.0), &Point::page(2, 1.0, 1.0));
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].chart, 2);
    }
}
