//! Mesh to LoD1 cuboid abstraction.
//!
//! A part of the mesh is fitted with its minimum-area footprint rectangle
//! extruded over the part's height range. Parts are split greedily: every box
//! proposes its best planar cut along one of its own axes (the cut that
//! minimizes the summed volume of the two refitted halves), and the box whose
//! cut removes the most empty volume is split, as long as that overshoot
//! exceeds [`SPLIT_OVERSHOOT`] and fewer than `max_boxes` boxes exist.
//! Triangles are clipped at the cut plane, so the two halves together still
//! cover the whole surface.

use super::{convex_hull, Cuboid, Point2, Point3};
use crate::error::{Error, Result};

pub type Triangle = [Point3; 3];

pub const DEFAULT_MAX_BOXES: usize = 5;

/// Relative volume a split has to remove before it is taken:
/// `(parent - children) / children`.
pub const SPLIT_OVERSHOOT: f64 = 0.15;

const MAX_CUT_CANDIDATES: usize = 64;

type Part = Vec<Vec<Point3>>;

#[derive(Debug, Clone)]
struct Fitted {
    part: Part,
    cuboid: Cuboid,
}

/// Diagonal of the mesh's axis-aligned bounding box.
pub fn mesh_bounding_diagonal(mesh: &[Triangle]) -> f64 {
    let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for p in mesh.iter().flatten() {
        lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    if mesh.is_empty() {
        0.0
    } else {
        (hi - lo).norm()
    }
}

/// Abstracts a triangle soup into at most `max_boxes` cuboids whose union
/// covers every vertex. Identical input gives identical output.
pub fn abstract_to_cuboids(mesh: &[Triangle], max_boxes: usize) -> Result<Vec<Cuboid>> {
    if mesh.is_empty() {
        return Err(Error::EmptyInput("mesh has no triangles"));
    }
    if max_boxes == 0 {
        return Err(Error::Validation("max_boxes must be at least 1".into()));
    }
    if mesh.iter().flatten().any(|p| !p.is_finite()) {
        return Err(Error::Validation("mesh has non-finite vertices".into()));
    }
    let diag = mesh_bounding_diagonal(mesh);
    let min_half = (diag * 1e-6).max(1e-9);

    let part: Part = mesh.iter().map(|t| t.to_vec()).collect();
    let mut boxes = vec![fit(part, min_half)];
    let mut proposals: Vec<Option<(f64, Fitted, Fitted)>> = vec![None];
    let mut stale = vec![true];

    while boxes.len() < max_boxes {
        for i in 0..boxes.len() {
            if stale[i] {
                proposals[i] = best_split(&boxes[i], min_half);
                stale[i] = false;
            }
        }
        let pick = proposals
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.as_ref().map(|(o, _, _)| (i, *o)))
            .fold(None::<(usize, f64)>, |best, (i, o)| match best {
                Some((_, bo)) if bo >= o => best,
                _ => Some((i, o)),
            });
        let Some((i, overshoot)) = pick else { break };
        if overshoot <= SPLIT_OVERSHOOT {
            break;
        }
        let (_, a, b) = proposals[i].take().expect("picked proposal exists");
        boxes[i] = a;
        boxes.insert(i + 1, b);
        proposals.insert(i + 1, None);
        stale[i] = true;
        stale.insert(i + 1, true);
    }
    Ok(boxes.into_iter().map(|f| f.cuboid).collect())
}

fn fit(part: Part, min_half: f64) -> Fitted {
    let pts: Vec<Point3> = part.iter().flatten().copied().collect();
    let cuboid = fit_points(&pts, min_half);
    Fitted { part, cuboid }
}

/// Minimum-area footprint rectangle extruded over the z range.
fn fit_points(pts: &[Point3], min_half: f64) -> Cuboid {
    let (zmin, zmax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.z), b.max(p.z)));
    let plan: Vec<Point2> = pts.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let (yaw, lo, hi) = min_area_rect(&plan);
    let (s, c) = yaw.sin_cos();
    let (u, v) = (Point2::new(c, s), Point2::new(-s, c));
    let mid = Point2::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y));
    let center2 = u * mid.x + v * mid.y;
    let half = [
        (0.5 * (hi.x - lo.x)).max(min_half),
        (0.5 * (hi.y - lo.y)).max(min_half),
        (0.5 * (zmax - zmin)).max(min_half),
    ];
    Cuboid::new(Point3::new(center2.x, center2.y, 0.5 * (zmin + zmax)), half, yaw)
        .expect("fitted extents are positive and finite")
}

/// Returns `(yaw, lo, hi)` where `lo`/`hi` bound the points in the frame
/// rotated by `yaw`, with yaw in `[0, π/2)`.
fn min_area_rect(plan: &[Point2]) -> (f64, Point2, Point2) {
    let extents = |yaw: f64| {
        let (s, c) = yaw.sin_cos();
        let (u, v) = (Point2::new(c, s), Point2::new(-s, c));
        plan.iter().fold(
            (
                Point2::new(f64::INFINITY, f64::INFINITY),
                Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
            ),
            |(lo, hi), &p| {
                let q = Point2::new(p.dot(u), p.dot(v));
                (
                    Point2::new(lo.x.min(q.x), lo.y.min(q.y)),
                    Point2::new(hi.x.max(q.x), hi.y.max(q.y)),
                )
            },
        )
    };
    let fold = |a: f64| {
        let q = std::f64::consts::FRAC_PI_2;
        let r = a.rem_euclid(q);
        // directions within rounding of a right angle count as axis-aligned
        if r > q - 1e-12 || r < 1e-12 {
            0.0
        } else {
            r
        }
    };
    let mut candidates: Vec<f64> = match convex_hull(plan) {
        Ok(hull) => hull.edges().map(|(a, b)| fold((b - a).angle())).collect(),
        Err(_) => {
            // collinear footprint: align with the spread direction
            let first = plan[0];
            let far = plan
                .iter()
                .copied()
                .max_by(|a, b| a.distance(first).total_cmp(&b.distance(first)))
                .unwrap_or(first);
            let d = far - first;
            vec![if d.norm() > 0.0 { fold(d.angle()) } else { 0.0 }]
        }
    };
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let mut best: Option<(f64, f64, Point2, Point2)> = None;
    for yaw in candidates {
        let (lo, hi) = extents(yaw);
        let area = (hi.x - lo.x) * (hi.y - lo.y);
        if best.as_ref().is_none_or(|b| area < b.0 * (1.0 - 1e-12)) {
            best = Some((area, yaw, lo, hi));
        }
    }
    let (_, yaw, lo, hi) = best.expect("at least one candidate direction");
    (yaw, lo, hi)
}

/// Best cut of `f` along its local axes: `(overshoot, low half, high half)`.
fn best_split(f: &Fitted, min_half: f64) -> Option<(f64, Fitted, Fitted)> {
    let c = f.cuboid;
    let (s, co) = c.yaw().sin_cos();
    let axes = [
        Point3::new(co, s, 0.0),
        Point3::new(-s, co, 0.0),
        Point3::new(0.0, 0.0, 1.0),
    ];
    let mut best: Option<(f64, Fitted, Fitted)> = None;
    for axis in axes {
        let mut coords: Vec<f64> = f.part.iter().flatten().map(|p| p.dot(axis)).collect();
        coords.sort_by(f64::total_cmp);
        coords.dedup();
        let (Some(&lo), Some(&hi)) = (coords.first(), coords.last()) else {
            continue;
        };
        let eps = (hi - lo) * 1e-9;
        let inner: Vec<f64> = coords.into_iter().filter(|&x| x > lo + eps && x < hi - eps).collect();
        let cuts: Vec<f64> = if inner.len() <= MAX_CUT_CANDIDATES {
            inner
        } else {
            (1..=MAX_CUT_CANDIDATES)
                .map(|k| lo + (hi - lo) * k as f64 / (MAX_CUT_CANDIDATES + 1) as f64)
                .collect()
        };
        for cut in cuts {
            for coplanar_below in [true, false] {
                let (a, b) = split_part(&f.part, axis, cut, coplanar_below);
                if a.is_empty() || b.is_empty() {
                    continue;
                }
                let (fa, fb) = (fit(a, min_half), fit(b, min_half));
                let children = fa.cuboid.volume() + fb.cuboid.volume();
                let overshoot = (c.volume() - children) / children;
                if best.as_ref().is_none_or(|(o, _, _)| overshoot > *o) {
                    best = Some((overshoot, fa, fb));
                }
            }
        }
    }
    best
}

/// Splits at the plane `p·axis = cut`. Polygons touching the plane from one
/// side stay whole; polygons lying in it go to the side picked by
/// `coplanar_below`; the rest are clipped into both halves.
fn split_part(part: &Part, axis: Point3, cut: f64, coplanar_below: bool) -> (Part, Part) {
    let mut below = Vec::new();
    let mut above = Vec::new();
    for poly in part {
        let s: Vec<f64> = poly.iter().map(|p| p.dot(axis) - cut).collect();
        let all_le = s.iter().all(|&v| v <= 0.0);
        let all_ge = s.iter().all(|&v| v >= 0.0);
        match (all_le, all_ge) {
            (true, true) if coplanar_below => below.push(poly.clone()),
            (true, true) => above.push(poly.clone()),
            (true, false) => below.push(poly.clone()),
            (false, true) => above.push(poly.clone()),
            (false, false) => {
                below.push(clip(poly, |p| cut - p.dot(axis)));
                above.push(clip(poly, |p| p.dot(axis) - cut));
            }
        }
    }
    (below, above)
}

/// Sutherland-Hodgman against the half-space `side(p) >= 0`.
fn clip(poly: &[Point3], side: impl Fn(Point3) -> f64) -> Vec<Point3> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let (sa, sb) = (side(a), side(b));
        if sa >= 0.0 {
            out.push(a);
        }
        if (sa >= 0.0) != (sb >= 0.0) {
            let t = sa / (sa - sb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_mesh(min: Point3, max: Point3) -> Vec<Triangle> {
        Cuboid::from_bounds(min, max).unwrap().triangles().to_vec()
    }

    #[test]
    fn single_box_is_its_own_abstraction() {
        let mesh = box_mesh(Point3::new(1.0, 2.0, 0.0), Point3::new(4.0, 3.0, 5.0));
        let out = abstract_to_cuboids(&mesh, 5).unwrap();
        assert_eq!(out.len(), 1);
        let c = out[0];
        assert_eq!(c.yaw(), 0.0);
        assert!((c.center() - Point3::new(2.5, 2.5, 2.5)).norm() < 1e-12);
        let h = c.half_extents();
        assert!((h[0] - 1.5).abs() < 1e-12 && (h[1] - 0.5).abs() < 1e-12 && (h[2] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rotated_box_recovers_yaw() {
        let c = Cuboid::new(Point3::new(0.0, 0.0, 2.0), [3.0, 1.0, 2.0], 0.3).unwrap();
        let out = abstract_to_cuboids(&c.triangles(), 5).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].yaw() - 0.3).abs() < 1e-9);
        assert!((out[0].volume() - c.volume()).abs() < 1e-9);
    }

    #[test]
    fn empty_mesh_is_rejected() {
        assert!(matches!(abstract_to_cuboids(&[], 5), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn max_boxes_caps_the_count() {
        let mut mesh = Vec::new();
        for k in 0..4 {
            let x = k as f64 * 3.0;
            mesh.extend(box_mesh(
                Point3::new(x, 0.0, 0.0),
                Point3::new(x + 1.0, 1.0, 1.0 + k as f64),
            ));
        }
        assert_eq!(abstract_to_cuboids(&mesh, 2).unwrap().len(), 2);
        assert_eq!(abstract_to_cuboids(&mesh, 1).unwrap().len(), 1);
        assert_eq!(abstract_to_cuboids(&mesh, 5).unwrap().len(), 4);
    }

    #[test]
    fn flat_mesh_gets_positive_thickness() {
        let quad = [
            [
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 1.0),
            ],
            [
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 1.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
        ];
        let out = abstract_to_cuboids(&quad, 5).unwrap();
        assert!(out.iter().all(|c| c.half_extents().iter().all(|h| *h > 0.0)));
    }
}
