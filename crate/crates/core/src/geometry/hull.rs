use std::collections::BTreeMap;

use super::polygon::signed_distance;
use super::{Point2, Polygon2};
use crate::error::{Error, Result};

/// Concavity of the extracted boundary.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AlphaMode {
    /// α = ∞: the convex hull.
    #[default]
    Convex,
    /// Finite α: an edge is on the boundary when some disk of this radius
    /// through both endpoints contains no other point.
    Radius(f64),
}

/// Boundary polygon of a point set with α = ∞ (convex hull).
pub fn alpha_shape(points: &[Point2]) -> Result<Polygon2> {
    alpha_shape_with(points, AlphaMode::Convex)
}

pub fn alpha_shape_with(points: &[Point2], mode: AlphaMode) -> Result<Polygon2> {
    match mode {
        AlphaMode::Convex => convex_hull(points),
        AlphaMode::Radius(alpha) => concave_alpha_shape(points, alpha),
    }
}

fn sorted_unique(points: &[Point2]) -> Result<Vec<Point2>> {
    if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(Error::Validation("non-finite point".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "need at least 3 distinct points, got {}",
            pts.len()
        )));
    }
    Ok(pts)
}

/// Andrew's monotone chain. The ring starts at the lexicographically lowest
/// point; collinear boundary points are dropped.
pub fn convex_hull(points: &[Point2]) -> Result<Polygon2> {
    let pts = sorted_unique(points)?;
    let turn = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);

    let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::DegenerateGeometry("all points are collinear".into()));
    }
    Ok(Polygon2::from_ccw_unchecked(lower))
}

fn concave_alpha_shape(points: &[Point2], alpha: f64) -> Result<Polygon2> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Validation(format!("alpha must be positive, got {alpha}")));
    }
    let pts = sorted_unique(points)?;
    let n = pts.len();
    let scale = pts.iter().map(|p| p.x.abs().max(p.y.abs())).fold(alpha, f64::max);
    let eps = 1e-9 * scale;

    // directed boundary edges, interior on the left
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (pts[i], pts[j]);
            let d = a.distance(b);
            if d > 2.0 * alpha {
                continue;
            }
            let m = (a + b) * 0.5;
            let h = (alpha * alpha - 0.25 * d * d).max(0.0).sqrt();
            let u = (b - a) * (1.0 / d);
            let normal = Point2::new(-u.y, u.x);
            for side in [1.0, -1.0] {
                let c = m + normal * (h * side);
                let empty = pts
                    .iter()
                    .enumerate()
                    .all(|(k, &p)| k == i || k == j || p.distance(c) >= alpha - eps);
                if !empty {
                    continue;
                }
                // the empty disk lies outside, so it must be on the right
                let (s, t) = if side > 0.0 { (j, i) } else { (i, j) };
                if next.insert(s, t).is_some() {
                    return Err(Error::DegenerateGeometry(format!(
                        "alpha {alpha} yields a non-manifold boundary"
                    )));
                }
            }
        }
    }
    let Some((&start, _)) = next.iter().next() else {
        return Err(Error::DegenerateGeometry(format!("alpha {alpha} yields no boundary")));
    };
    let mut ring = vec![start];
    let mut cur = start;
    loop {
        let Some(&nx) = next.get(&cur) else {
            return Err(Error::DegenerateGeometry("open alpha boundary".into()));
        };
        if nx == start {
            break;
        }
        if ring.len() > next.len() {
            return Err(Error::DegenerateGeometry("alpha boundary does not close".into()));
        }
        ring.push(nx);
        cur = nx;
    }
    if ring.len() != next.len() {
        return Err(Error::DegenerateGeometry(format!(
            "alpha {alpha} splits the points into several components"
        )));
    }
    let mut verts: Vec<Point2> = ring.iter().map(|&k| pts[k]).collect();
    // drop collinear vertices
    let mut k = 0;
    while verts.len() > 3 && k < verts.len() {
        let m = verts.len();
        let (a, b, c) = (verts[(k + m - 1) % m], verts[k], verts[(k + 1) % m]);
        if (b - a).cross(c - b).abs() <= eps * (b - a).norm().max((c - b).norm()).max(1.0) {
            verts.remove(k);
        } else {
            k += 1;
        }
    }
    let poly = Polygon2::new(verts)?;
    if pts.iter().any(|&p| signed_distance(p, &poly) > eps) {
        return Err(Error::DegenerateGeometry(format!(
            "alpha {alpha} leaves points outside the boundary"
        )));
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn interior_point_is_dropped() {
        let hull = alpha_shape(&[p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0), p(0.5, 0.5)]).unwrap();
        assert_eq!(hull.vertices(), &[p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]);
    }

    #[test]
    fn triangle_is_identity() {
        let hull = alpha_shape(&[p(0.0, 0.0), p(2.0, 0.0), p(1.0, 3.0)]).unwrap();
        assert_eq!(hull.len(), 3);
        assert!((hull.area() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_boundary_points_are_dropped() {
        let hull = alpha_shape(&[p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0), p(2.0, 2.0), p(0.0, 2.0)]).unwrap();
        assert_eq!(hull.len(), 4);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            alpha_shape(&[p(0.0, 0.0), p(1.0, 1.0)]),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(matches!(
            alpha_shape(&[p(0.0, 0.0), p(1.0, 1.0), p(2.0, 2.0), p(1.0, 1.0)]),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(matches!(
            alpha_shape(&[p(1.0, 1.0), p(1.0, 1.0), p(1.0, 1.0)]),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn large_alpha_matches_hull() {
        let pts = [
            p(0.0, 0.0),
            p(3.0, 0.0),
            p(3.0, 1.0),
            p(1.0, 1.0),
            p(1.0, 3.0),
            p(0.0, 3.0),
        ];
        let hull = alpha_shape(&pts).unwrap();
        let concave = alpha_shape_with(&pts, AlphaMode::Radius(1e3)).unwrap();
        assert!((hull.area() - concave.area()).abs() < 1e-9);
    }

    #[test]
    fn finite_alpha_follows_a_concave_outline() {
        // L = [0,3]x[0,1] ∪ [0,1]x[0,3], sampled on a 0.5 grid
        let mut pts = Vec::new();
        for i in 0..=6 {
            for j in 0..=6 {
                let (x, y) = (i as f64 * 0.5, j as f64 * 0.5);
                if x <= 1.0 || y <= 1.0 {
                    pts.push(p(x, y));
                }
            }
        }
        let shape = alpha_shape_with(&pts, AlphaMode::Radius(0.45)).unwrap();
        let hull = alpha_shape(&pts).unwrap();
        // the notch is recovered up to a single chamfer triangle at the inner corner
        assert!(
            shape.area() >= 5.0 - 1e-9 && shape.area() <= 5.2,
            "area {}",
            shape.area()
        );
        assert!(hull.area() - shape.area() > 1.5);
        for &q in &pts {
            assert!(signed_distance(q, &shape) <= 1e-9);
        }
    }
}
