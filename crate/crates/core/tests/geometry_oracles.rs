use proptest::prelude::*;

use urbanview::geometry::{convex_hull, max_diagonal, signed_distance, Point2, Polygon2};

/// Jarvis march. Collinear candidates resolve to the farthest point, so only
/// corners are returned.
fn gift_wrap(points: &[Point2]) -> Vec<Point2> {
    let start = *points
        .iter()
        .min_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)))
        .unwrap();
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut next = if points[0] == current { points[1] } else { points[0] };
        for &p in points {
            if p == current {
                continue;
            }
            let c = (next - current).cross(p - current);
            // p is clockwise of next: it wraps tighter
            if c < 0.0 || (c == 0.0 && current.distance(p) > current.distance(next)) {
                next = p;
            }
        }
        if next == start {
            break;
        }
        hull.push(next);
        current = next;
        assert!(hull.len() <= points.len(), "gift wrap did not close");
    }
    hull
}

fn sorted(mut v: Vec<Point2>) -> Vec<Point2> {
    v.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    v
}

fn lattice_points() -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec((-20i32..=20, -20i32..=20), 3..60)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point2::new(x as f64, y as f64)).collect())
}

fn not_collinear(points: &[Point2]) -> bool {
    let a = points[0];
    points
        .iter()
        .any(|&p| points.iter().any(|&q| (p - a).cross(q - a) != 0.0))
}

/// Winding number of `poly` around `p`.
fn winding(p: Point2, poly: &[Point2]) -> i32 {
    let mut w = 0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let side = (b - a).cross(p - a);
        if a.y <= p.y && b.y > p.y && side > 0.0 {
            w += 1;
        } else if a.y > p.y && b.y <= p.y && side < 0.0 {
            w -= 1;
        }
    }
    w
}

fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    // closest point found by ternary search on the segment parameter
    let f = |t: f64| p.distance(a + (b - a) * t);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0))
}

proptest! {
    #[test]
    fn hull_matches_gift_wrapping(points in lattice_points().prop_filter("collinear", |p| not_collinear(p))) {
        let hull = convex_hull(&points).unwrap();
        let mut unique = points.clone();
        unique.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        unique.dedup();
        prop_assert_eq!(sorted(hull.vertices().to_vec()), sorted(gift_wrap(&unique)));
        prop_assert!(hull.is_convex());
    }

    #[test]
    fn diameter_matches_all_pairs(points in lattice_points().prop_filter("collinear", |p| not_collinear(p))) {
        let hull = convex_hull(&points).unwrap();
        let brute = points
            .iter()
            .flat_map(|a| points.iter().map(move |b| a.distance(*b)))
            .fold(0.0, f64::max);
        prop_assert!((max_diagonal(&hull) - brute).abs() < 1e-9);
    }

    #[test]
    fn signed_distance_matches_brute_force(
        points in lattice_points().prop_filter("collinear", |p| not_collinear(p)),
        qx in -30.0f64..30.0,
        qy in -30.0f64..30.0,
    ) {
        let hull = convex_hull(&points).unwrap();
        let v = hull.vertices();
        let q = Point2::new(qx, qy);
        let d = (0..v.len())
            .map(|i| segment_distance(q, v[i], v[(i + 1) % v.len()]))
            .fold(f64::INFINITY, f64::min);
        let expected = if winding(q, v) != 0 { -d } else { d };
        prop_assert!((signed_distance(q, &hull) - expected).abs() < 1e-6);
    }
}

#[test]
fn concave_polygon_distance_and_diameter() {
    // an L shape
    let l = Polygon2::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(4.0, 0.0),
        Point2::new(4.0, 1.0),
        Point2::new(1.0, 1.0),
        Point2::new(1.0, 3.0),
        Point2::new(0.0, 3.0),
    ])
    .unwrap();
    assert!(!l.is_convex());
    assert!((max_diagonal(&l) - 5.0).abs() < 1e-12);
    // inside the notch is outside the polygon
    assert!((signed_distance(Point2::new(2.0, 2.0), &l) - 1.0).abs() < 1e-12);
    assert!((signed_distance(Point2::new(0.5, 2.0), &l) + 0.5).abs() < 1e-12);
    assert_eq!(signed_distance(Point2::new(4.0, 0.5), &l), 0.0);
}
