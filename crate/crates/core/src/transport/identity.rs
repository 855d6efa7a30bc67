use serde::Serialize;

use super::TransportMap;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::spaces::{Space, SpaceKind};

/// A uniform `nx × ny` grid in the plane with pitch `h`; node `(ix, iy)` has
/// index `iy * nx + ix` and sits at `origin + h (ix, iy)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub origin: [f64; 2],
    pub pitch: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// `n × n` nodes covering `[0, 1]²`.
    pub fn unit_square(n: usize) -> Self {
        Self { origin: [0.0, 0.0], pitch: 1.0 / (n as f64 - 1.0), nx: n, ny: n }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    pub fn point(&self, index: usize) -> Point {
        let (ix, iy) = self.coords(index);
        Point::euclidean(vec![self.origin[0] + self.pitch * ix as f64, self.origin[1] + self.pitch * iy as f64])
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    pub fn is_interior(&self, index: usize) -> bool {
        let (ix, iy) = self.coords(index);
        ix > 0 && iy > 0 && ix + 1 < self.nx && iy + 1 < self.ny
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.is_interior(k)).collect()
    }

    /// Bilinear interpolation of node values at `p`, clamped to the grid.
    pub fn interpolate(&self, values: &[f64], p: &Point) -> f64 {
        let cell = |c: f64, o: f64, n: usize| {
            let x = ((c - o) / self.pitch).clamp(0.0, (n - 1) as f64);
            let i = (x.floor() as usize).min(n.saturating_sub(2));
            (i, x - i as f64)
        };
        let (ix, fx) = cell(p.coords[0], self.origin[0], self.nx);
        let (iy, fy) = cell(p.coords[1], self.origin[1], self.ny);
        let at = |dx: usize, dy: usize| values[(iy + dy) * self.nx + ix + dx];
        (1.0 - fy) * ((1.0 - fx) * at(0, 0) + fx * at(1, 0)) + fy * ((1.0 - fx) * at(0, 1) + fx * at(1, 1))
    }

    /// Central-difference gradient of node values at an interior node.
    pub fn gradient(&self, values: &[f64], index: usize) -> Result<[f64; 2]> {
        if !self.is_interior(index) {
            return Err(Error::BoundaryPoint { index });
        }
        let h2 = 2.0 * self.pitch;
        Ok([
            (values[index + 1] - values[index - 1]) / h2,
            (values[index + self.nx] - values[index - self.nx]) / h2,
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    /// `|D̃ψ(x; γ) + D_x c(x, T(x); γ)|` along `γ = [x, T(x)]`.
    pub identity: f64,
    /// `|T(x) − x − ∇̃ψ(x)|` (Euclidean only).
    pub brenier: Option<f64>,
}

/// Residual of `D̃ψ(x; γ) + D_x c(x, T(x); γ) = 0` at grid node `x_index`.
///
/// `D̃ψ` is the derivative of the grid potential along `γ`, read off the
/// central-difference gradient, and `D_x c(x, T(x); γ) = −d(x, T(x))²`.
pub fn verify_transport_identity(
    space: &Space,
    grid: &Grid,
    psi: &[f64],
    map: &TransportMap,
    x_index: usize,
) -> Result<IdentityResidual> {
    if !matches!(space.kind(), SpaceKind::Euclidean) || space.dim() != 2 {
        return Err(Error::UnsupportedSpace("grid potentials live in the Euclidean plane".into()));
    }
    if psi.len() != grid.len() || map.len() != grid.len() {
        return Err(Error::MapUndefined(format!(
            "grid has {} nodes, potential {} values, map {} images",
            grid.len(),
            psi.len(),
            map.len()
        )));
    }
    if x_index >= grid.len() {
        return Err(Error::MapUndefined(format!("node {x_index} is outside the grid")));
    }
    let grad = grid.gradient(psi, x_index)?;
    let x = grid.point(x_index);
    let tx = map.image(x_index)?;
    space.validate(tx)?;
    let step = [tx.coords[0] - x.coords[0], tx.coords[1] - x.coords[1]];
    let d2 = step[0] * step[0] + step[1] * step[1];
    let along = grad[0] * step[0] + grad[1] * step[1];
    let brenier = (step[0] - grad[0]).hypot(step[1] - grad[1]);
    Ok(IdentityResidual { identity: (along - d2).abs(), brenier: Some(brenier) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_potential_and_translation() {
        let e2 = Space::euclidean(2).unwrap();
        let grid = Grid::unit_square(5);
        let v = [0.3, 0.2];
        let psi: Vec<f64> = grid.points().iter().map(|p| v[0] * p.coords[0] + v[1] * p.coords[1]).collect();
        let map = TransportMap::new(
            grid.points().into_iter().map(|p| Point::euclidean(vec![p.coords[0] + v[0], p.coords[1] + v[1]])).collect(),
        );
        for k in grid.interior() {
            let r = verify_transport_identity(&e2, &grid, &psi, &map, k).unwrap();
            assert!(r.identity < 1e-12 && r.brenier.unwrap() < 1e-12);
        }
        assert!(matches!(verify_transport_identity(&e2, &grid, &psi, &map, 0), Err(Error::BoundaryPoint { .. })));
    }

    #[test]
    fn interpolation_reproduces_bilinear_functions() {
        let grid = Grid { origin: [1.0, -1.0], pitch: 0.5, nx: 4, ny: 3 };
        let f = |x: f64, y: f64| 2.0 + 3.0 * x - y + 0.5 * x * y;
        let vals: Vec<f64> = grid.points().iter().map(|p| f(p.coords[0], p.coords[1])).collect();
        for (x, y) in [(1.0, -1.0), (1.3, -0.2), (2.5, 0.0), (2.2, -0.75)] {
            assert!((grid.interpolate(&vals, &Point::euclidean(vec![x, y])) - f(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_map_with_constant_potential() {
        let e2 = Space::euclidean(2).unwrap();
        let grid = Grid::unit_square(4);
        let map = TransportMap::new(grid.points());
        let r = verify_transport_identity(&e2, &grid, &[1.0; 16], &map, 5).unwrap();
        assert_eq!(r.identity, 0.0);
        assert_eq!(r.brenier, Some(0.0));
        let short = TransportMap::new(grid.points()[..3].to_vec());
        assert!(matches!(verify_transport_identity(&e2, &grid, &[1.0; 16], &short, 5), Err(Error::MapUndefined(_))));
    }
}
