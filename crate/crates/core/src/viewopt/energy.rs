use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::problem::{OptimizationProblem, ProjectedPart};
use super::{EnergyConfig, MAX_EXPONENT};
use crate::geometry::{signed_distance, wrap_angle, Plane, Point2, Point3, Polygon2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyTerms {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

impl EnergyTerms {
    pub fn weighted(&self, omega: [f64; 3]) -> f64 {
        omega[0] * self.e1 + omega[1] * self.e2 + omega[2] * self.e3
    }
}

fn exp_clamped(x: f64) -> f64 {
    x.clamp(-MAX_EXPONENT, MAX_EXPONENT).exp()
}

/// Elevation angle of `p` seen from `center`, in `[-π/2, π/2]`.
pub fn view_elevation(p: Point3, center: Point3) -> f64 {
    let d = p - center;
    d.z.atan2(d.x.hypot(d.y))
}

/// One plane's distance and angle contribution to `E1`, given the signed
/// distance `d` to that plane's outline and the view elevation `theta`.
pub fn e1_plane_term(d: f64, theta: f64, d_alpha: f64, config: &EnergyConfig) -> f64 {
    let u = config.length_unit;
    let dmin = config.dmin_factor * d_alpha;
    let dmax = config.dmax_factor * d_alpha;
    let dist = config.lambda0 * exp_clamped((d - dmin) * (d - dmax) / (u * u));
    let angle = config.lambda1 * exp_clamped((theta - config.theta0).powi(2) + (theta - config.theta1).powi(2));
    dist + angle
}

/// Camera-target distance energy summed over the three planes.
pub fn energy_e1(p: Point3, problem: &OptimizationProblem) -> f64 {
    let theta = view_elevation(p, problem.centroid());
    problem
        .planes()
        .iter()
        .map(|c| {
            let d = signed_distance(c.plane.project(p), &c.shape);
            e1_plane_term(d, theta, c.d_alpha, problem.config())
        })
        .sum()
}

/// Camera obstruction energy: `Σ_i 1 / Σ_Π e^{d_i(Π)}`.
pub fn energy_e2(p: Point3, problem: &OptimizationProblem) -> f64 {
    let u = problem.config().length_unit;
    let n = problem.occluders().len();
    (0..n)
        .map(|i| {
            let inner: f64 = Plane::ALL
                .iter()
                .map(|&plane| {
                    let part = &problem.occluder_parts(plane)[i];
                    exp_clamped(signed_distance(plane.project(p), &part.polygon) / u)
                })
                .sum();
            1.0 / inner
        })
        .sum()
}

/// Angular extent of `poly` seen from `p`, as `(start, width)` with the
/// start in `[0, 2π)`. `None` when `p` is inside or on the polygon.
pub fn angular_interval(p: Point2, poly: &Polygon2) -> Option<(f64, f64)> {
    if signed_distance(p, poly) <= 0.0 {
        return None;
    }
    let towards = (poly.centroid() - p).angle();
    let (lo, hi) = poly
        .vertices()
        .iter()
        .map(|&v| crate::geometry::wrap_pi((v - p).angle() - towards))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| (lo.min(a), hi.max(a)));
    Some((wrap_angle(towards + lo), hi - lo))
}

/// Length of the intersection of two circular arcs given as
/// `(start, width)` with starts in `[0, 2π)`.
pub fn interval_overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (a0, wa) = a;
    let (b0, wb) = b;
    [-TAU, 0.0, TAU]
        .iter()
        .map(|shift| {
            let lo = a0.max(b0 + shift);
            let hi = (a0 + wa).min(b0 + shift + wb);
            (hi - lo).max(0.0)
        })
        .sum::<f64>()
        .min(wa.min(wb))
}

/// `E3` contribution of one (target part, other part) pair on one plane.
pub fn occlusion_pair_term(p: Point2, target: &ProjectedPart, other: &ProjectedPart, inverted: bool) -> f64 {
    let to_target = target.center - other.center;
    let to_view = p - other.center;
    let theta1 = if to_target.norm() == 0.0 || to_view.norm() == 0.0 {
        0.0
    } else {
        to_target.cross(to_view).abs().atan2(to_target.dot(to_view))
    };
    let theta2 = match angular_interval(p, &target.polygon) {
        None => PI,
        Some(ti) => {
            let oi = angular_interval(p, &other.polygon).unwrap_or((0.0, TAU));
            interval_overlap(ti, oi)
        }
    };
    let e1 = theta1.exp();
    let weight = if inverted { e1 / (e1 + 1.0) } else { 1.0 / (e1 + 1.0) };
    weight * theta2.exp()
}

/// View occlusion energy on a single plane.
pub fn energy_e3_plane(p: Point3, problem: &OptimizationProblem, plane: Plane) -> f64 {
    let q = plane.project(p);
    let inverted = problem.config().e3_theta1_inverted;
    let targets = problem.target_parts(plane);
    let occluders = problem.occluder_parts(plane);
    let mut sum = 0.0;
    for (i, t) in targets.iter().enumerate() {
        for (j, other) in targets.iter().enumerate() {
            if i != j {
                sum += occlusion_pair_term(q, t, other, inverted);
            }
        }
        for other in occluders {
            sum += occlusion_pair_term(q, t, other, inverted);
        }
    }
    sum
}

pub fn energy_e3(p: Point3, problem: &OptimizationProblem) -> f64 {
    Plane::ALL.iter().map(|&pl| energy_e3_plane(p, problem, pl)).sum()
}

pub fn energy_terms(p: Point3, problem: &OptimizationProblem) -> EnergyTerms {
    EnergyTerms {
        e1: energy_e1(p, problem),
        e2: energy_e2(p, problem),
        e3: energy_e3(p, problem),
    }
}

/// `ω1 E1 + ω2 E2 + ω3 E3`. Terms with zero weight are skipped.
pub fn total_energy(p: Point3, problem: &OptimizationProblem) -> f64 {
    let w = problem.config().omega;
    let mut e = 0.0;
    if w[0] != 0.0 {
        e += w[0] * energy_e1(p, problem);
    }
    if w[1] != 0.0 {
        e += w[1] * energy_e2(p, problem);
    }
    if w[2] != 0.0 {
        e += w[2] * energy_e3(p, problem);
    }
    e
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    use approx::assert_relative_eq;

    use super::*;
    use crate::geometry::Cuboid;

    fn cube(min: [f64; 3], max: [f64; 3]) -> Cuboid {
        Cuboid::from_bounds(min.into(), max.into()).unwrap()
    }

    fn problem(targets: Vec<Cuboid>, occluders: Vec<Cuboid>) -> OptimizationProblem {
        OptimizationProblem::new(targets, occluders, EnergyConfig::default()).unwrap()
    }

    #[test]
    fn e1_plane_term_at_one_diameter_overhead() {
        let cfg = EnergyConfig::default();
        let v = e1_plane_term(SQRT_2, FRAC_PI_2, SQRT_2, &cfg);
        let expected = (-0.5f64).exp() + (PI * PI / 8.0).exp();
        assert_relative_eq!(v, expected, max_relative = 1e-12);
        assert_relative_eq!(v, 4.04044, epsilon = 1e-5);
    }

    #[test]
    fn e1_distance_term_is_lambda0_at_dmin() {
        let cfg = EnergyConfig {
            lambda1: 0.0,
            lambda0: 2.5,
            ..EnergyConfig::default()
        };
        assert_relative_eq!(e1_plane_term(0.5 * 3.0, 0.0, 3.0, &cfg), 2.5);
    }

    #[test]
    fn e1_grows_with_distance() {
        let p = problem(vec![cube([0.0; 3], [1.0; 3])], vec![]);
        let near = energy_e1(Point3::new(2.0, 2.0, 3.0), &p);
        let far = energy_e1(Point3::new(20.0, 20.0, 30.0), &p);
        assert!(far > 1e6 * near);
    }

    #[test]
    fn e2_with_unit_distance_on_every_plane() {
        let p = problem(vec![cube([5.0; 3], [6.0; 3])], vec![cube([0.0; 3], [1.0; 3])]);
        let a = 1.0 + std::f64::consts::FRAC_1_SQRT_2;
        let v = energy_e2(Point3::new(a, a, a), &p);
        assert_relative_eq!(v, 1.0 / (3.0 * std::f64::consts::E), max_relative = 1e-12);
    }

    #[test]
    fn e2_is_zero_without_occluders_and_large_inside() {
        let lone = problem(vec![cube([0.0; 3], [1.0; 3])], vec![]);
        assert_eq!(energy_e2(Point3::new(3.0, 3.0, 3.0), &lone), 0.0);
        let p = problem(vec![cube([20.0; 3], [21.0; 3])], vec![cube([0.0; 3], [10.0; 3])]);
        let inside = energy_e2(Point3::new(5.0, 5.0, 5.0), &p);
        let outside = energy_e2(Point3::new(12.0, 12.0, 12.0), &p);
        assert!(inside > 100.0 * outside);
    }

    #[test]
    fn e3_collinear_pair() {
        let h = 10.0 * 0.2f64.tan();
        let p = problem(
            vec![cube([10.0, -h, 0.0], [11.0, h, 1.0])],
            vec![cube([2.0, -5.0, 0.0], [3.0, 5.0, 1.0])],
        );
        let v = energy_e3_plane(Point3::new(0.0, 0.0, 0.5), &p, Plane::XY);
        let expected = 0.4f64.exp() / (PI.exp() + 1.0);
        assert_relative_eq!(v, expected, max_relative = 1e-9);
        assert_relative_eq!(v, 0.0618, epsilon = 1e-4);
    }

    #[test]
    fn e3_single_target_is_zero() {
        let p = problem(vec![cube([0.0; 3], [1.0; 3])], vec![]);
        assert_eq!(energy_e3(Point3::new(3.0, 2.0, 4.0), &p), 0.0);
    }

    #[test]
    fn disjoint_intervals_do_not_overlap() {
        assert_eq!(interval_overlap((0.1, 0.2), (1.0, 0.5)), 0.0);
        assert_relative_eq!(interval_overlap((6.2, 0.3), (0.0, 0.1)), 0.1, epsilon = 1e-12);
        assert_relative_eq!(interval_overlap((6.0, 1.0), (0.2, 0.3)), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn interval_of_square_seen_from_axis() {
        let sq = Polygon2::new(vec![
            Point2::new(2.0, -1.0),
            Point2::new(4.0, -1.0),
            Point2::new(4.0, 1.0),
            Point2::new(2.0, 1.0),
        ])
        .unwrap();
        let (start, width) = angular_interval(Point2::new(0.0, 0.0), &sq).unwrap();
        assert_relative_eq!(width, 2.0 * 0.5f64.atan(), epsilon = 1e-12);
        assert_relative_eq!(start, TAU - 0.5f64.atan(), epsilon = 1e-12);
        assert!(angular_interval(Point2::new(3.0, 0.0), &sq).is_none());
    }

    #[test]
    fn total_is_weighted_sum() {
        let p = problem(
            vec![cube([0.0; 3], [1.0; 3]), cube([1.0, 0.0, 0.0], [2.0, 1.0, 3.0])],
            vec![cube([4.0, 0.0, 0.0], [5.0, 2.0, 2.0])],
        );
        let x = Point3::new(3.0, -2.0, 2.5);
        let t = energy_terms(x, &p);
        assert_relative_eq!(
            total_energy(x, &p),
            t.e1 + 100.0 * t.e2 + 10.0 * t.e3,
            max_relative = 1e-12
        );
    }
}
