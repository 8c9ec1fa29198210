use serde::{Deserialize, Serialize};

use super::Point2;
use crate::error::{Error, Result};

/// Closed simple polygon with counter-clockwise vertex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct Polygon2 {
    vertices: Vec<Point2>,
}

impl TryFrom<Vec<Point2>> for Polygon2 {
    type Error = Error;
    fn try_from(v: Vec<Point2>) -> Result<Self> {
        Polygon2::new(v)
    }
}

impl From<Polygon2> for Vec<Point2> {
    fn from(p: Polygon2) -> Self {
        p.vertices
    }
}

impl Polygon2 {
    /// Validates and normalizes the vertex ring. Clockwise input is reversed;
    /// repeated consecutive vertices are collapsed.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self> {
        if vertices.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::Validation("polygon has non-finite vertices".into()));
        }
        vertices.dedup();
        while vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::DegenerateGeometry(format!(
                "polygon needs at least 3 distinct vertices, got {}",
                vertices.len()
            )));
        }
        let area = signed_area(&vertices);
        if area == 0.0 {
            return Err(Error::DegenerateGeometry("polygon has zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        if self_intersects(&vertices) {
            return Err(Error::DegenerateGeometry("polygon self-intersects".into()));
        }
        Ok(Polygon2 { vertices })
    }

    /// Skips validation; callers guarantee a simple counter-clockwise ring.
    pub(crate) fn from_ccw_unchecked(vertices: Vec<Point2>) -> Self {
        debug_assert!(vertices.len() >= 3 && signed_area(&vertices) > 0.0);
        Polygon2 { vertices }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point2 {
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut a2 = 0.0;
        for (p, q) in self.edges() {
            let w = p.cross(q);
            a2 += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        Point2::new(cx / (3.0 * a2), cy / (3.0 * a2))
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) >= 0.0
        })
    }

    /// Point-in-polygon by crossing parity; boundary points are not reported
    /// reliably, use [`signed_distance`] when that matters.
    pub fn contains(&self, p: Point2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn translated(&self, by: Point2) -> Polygon2 {
        Polygon2 {
            vertices: self.vertices.iter().map(|&v| v + by).collect(),
        }
    }
}

fn signed_area(v: &[Point2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

fn self_intersects(v: &[Point2]) -> bool {
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in i + 1..n {
            // adjacent edges share a vertex by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (v[j], v[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 {
        ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.distance(a + ab * t)
}

/// Signed Euclidean distance from `p` to the polygon boundary: negative
/// strictly inside, positive outside, zero on the boundary.
pub fn signed_distance(p: Point2, poly: &Polygon2) -> f64 {
    let d = poly
        .edges()
        .map(|(a, b)| point_segment_distance(p, a, b))
        .fold(f64::INFINITY, f64::min);
    if d == 0.0 {
        0.0
    } else if poly.contains(p) {
        -d
    } else {
        d
    }
}

/// Largest distance between any two vertices (the polygon's diameter).
pub fn max_diagonal(poly: &Polygon2) -> f64 {
    if poly.is_convex() {
        rotating_calipers_diameter(poly.vertices())
    } else {
        let v = poly.vertices();
        let mut best = 0.0f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                best = best.max(v[i].distance(v[j]));
            }
        }
        best
    }
}

/// Diameter of a convex counter-clockwise ring via antipodal pairs.
fn rotating_calipers_diameter(v: &[Point2]) -> f64 {
    let n = v.len();
    let mut best = 0.0f64;
    let mut j = 1;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        let e = b - a;
        // advance j while the area spanned with edge (a, b) keeps growing
        while e.cross(v[(j + 1) % n] - a) > e.cross(v[j] - a) {
            j = (j + 1) % n;
        }
        best = best.max(a.distance(v[j])).max(b.distance(v[j]));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon2 {
        Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(p.area() > 0.0);
    }

    #[test]
    fn rejects_bow_tie_and_degenerates() {
        let bow = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ]);
        assert!(bow.is_err());
        let line = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(2.0, 2.0),
        ]);
        assert!(matches!(line, Err(Error::DegenerateGeometry(_))));
        assert!(Polygon2::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn signed_distance_examples() {
        let sq = unit_square();
        assert_eq!(signed_distance(Point2::new(0.5, 0.5), &sq), -0.5);
        assert_eq!(signed_distance(Point2::new(2.0, 0.5), &sq), 1.0);
        assert_eq!(signed_distance(Point2::new(0.5, 1.0), &sq), 0.0);
        assert_eq!(signed_distance(Point2::new(0.0, 0.0), &sq), 0.0);
    }

    #[test]
    fn diagonal_examples() {
        assert!((max_diagonal(&unit_square()) - 2f64.sqrt()).abs() < 1e-15);
        let h = 3f64.sqrt();
        let tri = Polygon2::new(vec![Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(1.0, h)]).unwrap();
        assert!((max_diagonal(&tri) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn centroid_of_square() {
        let c = unit_square().centroid();
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
    }
}
