use super::{Geodesic, Piece, Point};
use crate::error::{Error, Result};
use crate::spaces::{Space, SpaceKind};

/// Prolongs `γ` past its end by arc-length `delta`.
///
/// At branch points (tree vertices of degree ≥ 3, the spine of a book with
/// three or more pages) the continuation enters the admissible chart with the
/// lowest id.
pub fn extend(space: &Space, gamma: &Geodesic, delta: f64) -> Result<Geodesic> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::ParamOutOfRange { name: "delta", value: delta });
    }
    let last = gamma.pieces().last().ok_or(Error::DegenerateGeodesic)?;
    let dir = last.direction();
    let end = &last.to;
    let extra = match space.kind() {
        SpaceKind::Euclidean => {
            vec![Piece::new(0, end.clone(), step(end, &dir, delta))]
        }
        SpaceKind::OpenBook { pages } => {
            let (u, du) = (end[0], dir[0]);
            let to_spine = if du < 0.0 { u / -du } else { f64::INFINITY };
            if delta <= to_spine {
                vec![Piece::new(last.chart, end.clone(), step(end, &dir, delta))]
            } else {
                let page = (0..*pages).find(|&p| p != last.chart).expect("at least two pages");
                let hit = vec![0.0, end[1] + to_spine * dir[1]];
                let rest = delta - to_spine;
                let mirrored = [-du, dir[1]];
                vec![
                    Piece::new(last.chart, end.clone(), hit.clone()),
                    Piece::new(page, hit.clone(), step(&hit, &mirrored, rest)),
                ]
            }
        }
        SpaceKind::Tree(tree) => {
            let mut pieces = Vec::new();
            let mut edge = last.chart;
            let mut s = end[0];
            let mut forward = dir[0] > 0.0;
            let mut remaining = delta;
            loop {
                let e = tree.edges()[edge];
                let room = if forward { e.length - s } else { s };
                if remaining <= room {
                    let t = if forward { s + remaining } else { s - remaining };
                    pieces.push(Piece::new(edge, vec![s], vec![t]));
                    break;
                }
                let vertex = if forward { e.b } else { e.a };
                pieces.push(Piece::new(edge, vec![s], vec![e.coord_of(vertex)]));
                remaining -= room;
                let Some(&next) = tree.incident(vertex).iter().find(|&&f| f != edge) else {
                    return Err(Error::NotExtendable { requested: delta, available: delta - remaining });
                };
                edge = next;
                let ne = tree.edges()[next];
                s = ne.coord_of(vertex);
                forward = vertex == ne.a;
            }
            pieces
        }
    };
    let tail = extra.last().expect("extension adds a piece");
    let end = space.normalize(&Point::new(tail.chart, tail.to.clone()))?;
    Ok(gamma.append(end, extra))
}

fn step(from: &[f64], dir: &[f64], len: f64) -> Vec<f64> {
    from.iter().zip(dir).map(|(a, d)| a + len * d).collect()
}
