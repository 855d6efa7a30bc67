use cat0ot::calculus::{cost, cost_derivative_closed, default_derivative_schedule, geodesic_derivative, radial_projection};
use cat0ot::geometry::{cat0_defect, project_convex, ConvexSet};
use cat0ot::transport::{brute_force_oracle, c_transform, solve_kantorovich, DiscreteMeasure};
use cat0ot::{Point, Space};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn spaces() -> Vec<Space> {
    vec![
        Space::euclidean(2).unwrap(),
        Space::euclidean(3).unwrap(),
        Space::tripod(),
        Space::comb(1, 4).unwrap(),
        Space::open_book(3).unwrap(),
    ]
}

/// A valid point of `space` from raw numbers in `[0, 1)`.
fn point(space: &Space, raw: &[f64; 4]) -> Point {
    match space.as_tree() {
        Some(tree) => {
            let e = (raw[0] * tree.edges().len() as f64) as usize;
            Point::on_edge(e, raw[1] * tree.edges()[e].length)
        }
        None => match space.kind() {
            cat0ot::spaces::SpaceKind::OpenBook { pages } => {
                let page = (raw[0] * *pages as f64) as usize;
                Point::page(page, 2.0 * raw[1], 4.0 * raw[2] - 2.0)
            }
            _ => Point::euclidean(raw[1..=space.dim()].iter().map(|r| 4.0 * r - 2.0).collect::<Vec<_>>()),
        },
    }
}

fn raw() -> impl Strategy<Value = [f64; 4]> {
    [0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64]
}

fn space_index() -> impl Strategy<Value = usize> {
    0..5usize
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn metric_axioms(k in space_index(), a in raw(), b in raw(), c in raw()) {
        let s = &spaces()[k];
        let (x, y, z) = (point(s, &a), point(s, &b), point(s, &c));
        let dxy = s.distance(&x, &y).unwrap();
        prop_assert!(dxy >= 0.0);
        prop_assert!((dxy - s.distance(&y, &x).unwrap()).abs() <= TOL);
        prop_assert!(s.distance(&x, &x).unwrap() <= TOL);
        prop_assert!(dxy <= s.distance(&x, &z).unwrap() + s.distance(&z, &y).unwrap() + TOL);
    }

    #[test]
    fn geodesics_have_constant_speed(k in space_index(), a in raw(), b in raw(), s0 in 0.0..=1.0f64, t0 in 0.0..=1.0f64) {
        let s = &spaces()[k];
        let g = s.geodesic(&point(s, &a), &point(s, &b)).unwrap();
        let d = s.distance(&g.eval(s0), &g.eval(t0)).unwrap();
        prop_assert!((d - (s0 - t0).abs() * g.length()).abs() <= TOL);
    }

    #[test]
    fn curvature_defect_is_non_negative(k in space_index(), a in raw(), b in raw(), c in raw(), t in 0.0..=1.0f64) {
        let s = &spaces()[k];
        let defect = cat0_defect(s, &point(s, &a), &point(s, &b), &point(s, &c), t).unwrap();
        prop_assert!(defect >= -TOL);
        if k < 2 {
            prop_assert!(defect.abs() <= TOL);
        }
    }

    #[test]
    fn projection_onto_a_ball(k in space_index(), a in raw(), b in raw(), c in raw(), radius in 0.1..1.5f64, t in 0.0..=1.0f64) {
        let s = &spaces()[k];
        let center = point(s, &a);
        let set = ConvexSet::Ball { center: center.clone(), radius };
        let x = point(s, &b);
        let px = project_convex(s, &x, &set).unwrap();
        let z = point(s, &c);
        let dz = s.distance(&center, &z).unwrap();
        let y = s.convex_combination(&center, &z, if dz <= radius { 1.0 } else { t * radius / dz }).unwrap();
        let (p, q, r) = (s.distance(&x, &px).unwrap(), s.distance(&y, &px).unwrap(), s.distance(&x, &y).unwrap());
        prop_assert!(p * p + q * q <= r * r + TOL);
        prop_assert!(s.distance(&center, &px).unwrap() <= radius + TOL);
    }

    #[test]
    fn radial_projection_is_non_expansive(k in space_index(), a in raw(), b in raw(), c in raw(), d in raw()) {
        let s = &spaces()[k];
        let g = s.geodesic(&point(s, &a), &point(s, &b)).unwrap();
        let (x, y) = (point(s, &c), point(s, &d));
        let (rx, ry) = (radial_projection(s, &g, &x).unwrap(), radial_projection(s, &g, &y).unwrap());
        prop_assert!(s.distance(&rx, &ry).unwrap() <= s.distance(&x, &y).unwrap() + TOL);
    }

    #[test]
    fn cost_derivative_matches_closed_form(k in space_index(), a in raw(), b in raw(), t in 0.0..=1.0f64, s0 in 0.0..=1.0f64) {
        let s = &spaces()[k];
        let g = s.geodesic(&point(s, &a), &point(s, &b)).unwrap();
        prop_assume!(g.length() > 1e-3);
        let v = g.eval(s0);
        let est = geodesic_derivative(s, |p| cost(s, p, &v).unwrap(), &g.eval(t), &g, &default_derivative_schedule()).unwrap();
        let exact = cost_derivative_closed(&g, t, s0).unwrap();
        prop_assert!((est.value - exact).abs() <= 1e-6, "{} vs {}", est.value, exact);
    }

    #[test]
    fn solver_matches_the_permutation_oracle(k in space_index(), pts in proptest::collection::vec(raw(), 2..=12)) {
        let s = &spaces()[k];
        let half = pts.len() / 2;
        let source: Vec<Point> = pts[..half].iter().map(|r| point(s, r)).collect();
        let target: Vec<Point> = pts[half..2 * half].iter().map(|r| point(s, r)).collect();
        let distinct = |v: &[Point]| v.iter().enumerate().all(|(i, p)| v[..i].iter().all(|q| !s.same_point(p, q)));
        prop_assume!(distinct(&source) && distinct(&target));
        let mu = DiscreteMeasure::uniform(s, source).unwrap();
        let nu = DiscreteMeasure::uniform(s, target).unwrap();
        let sol = solve_kantorovich(s, &mu, &nu).unwrap();
        let (_, best) = brute_force_oracle(s, &mu, &nu).unwrap();
        prop_assert!((sol.cost - best).abs() <= TOL);
        prop_assert!((sol.cost - sol.dual_objective).abs() <= TOL);
        prop_assert!(sol.potentials.slack_max <= TOL);
        // The target potential is the c-transform of the source potential.
        let phi = c_transform(s, &sol.potentials.psi, &mu.points, &nu.points).unwrap();
        for (a, b) in phi.iter().zip(&sol.potentials.phi) {
            prop_assert!((a - b).abs() <= TOL);
        }
    }
}
