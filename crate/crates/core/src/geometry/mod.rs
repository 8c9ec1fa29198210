//! Spatial primitives shared by the rasterizer and the viewpoint energy.

mod abstraction;
mod hull;
mod polygon;

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use abstraction::{abstract_to_cuboids, mesh_bounding_diagonal, Triangle, DEFAULT_MAX_BOXES};
pub use hull::{alpha_shape, alpha_shape_with, convex_hull, AlphaMode};
pub use polygon::{max_diagonal, signed_distance, Polygon2};

/// Point or vector in scene space (meters, z-up).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ZERO: Point3 = Point3::new(0.0, 0.0, 0.0);
    pub const Z: Point3 = Point3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Point3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        (n > 1e-300 && n.is_finite()).then(|| self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Unsigned angle to `o` in `[0, π]`; zero vectors give `None`.
    pub fn angle_to(self, o: Point3) -> Option<f64> {
        if self.norm() == 0.0 || o.norm() == 0.0 {
            return None;
        }
        Some(self.cross(o).norm().atan2(self.dot(o)))
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        p.to_array()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Point3 {
    fn add_assign(&mut self, o: Point3) {
        *self = *self + o;
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Point3 {
    type Output = Point3;
    fn div(self, s: f64) -> Point3 {
        Point3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(a: [f64; 2]) -> Self {
        Point2::new(a[0], a[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Axis-aligned projection plane. The dropped coordinate is the one not named.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    XY,
    XZ,
    YZ,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::XY, Plane::XZ, Plane::YZ];

    pub fn project(self, p: Point3) -> Point2 {
        match self {
            Plane::XY => Point2::new(p.x, p.y),
            Plane::XZ => Point2::new(p.x, p.z),
            Plane::YZ => Point2::new(p.y, p.z),
        }
    }

    /// Inverse of [`Plane::project`] with the dropped coordinate set to zero.
    pub fn embed(self, q: Point2) -> Point3 {
        match self {
            Plane::XY => Point3::new(q.x, q.y, 0.0),
            Plane::XZ => Point3::new(q.x, 0.0, q.y),
            Plane::YZ => Point3::new(0.0, q.x, q.y),
        }
    }
}

/// Normalizes an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Box with a vertical yaw axis: the LoD1 abstraction unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CuboidRepr", into = "CuboidRepr")]
pub struct Cuboid {
    center: Point3,
    half_extents: [f64; 3],
    yaw: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CuboidRepr {
    center: Point3,
    half_extents: [f64; 3],
    #[serde(default)]
    yaw: f64,
}

impl TryFrom<CuboidRepr> for Cuboid {
    type Error = Error;
    fn try_from(r: CuboidRepr) -> Result<Self> {
        Cuboid::new(r.center, r.half_extents, r.yaw)
    }
}

impl From<Cuboid> for CuboidRepr {
    fn from(c: Cuboid) -> Self {
        CuboidRepr {
            center: c.center,
            half_extents: c.half_extents,
            yaw: c.yaw,
        }
    }
}

impl Cuboid {
    pub fn new(center: Point3, half_extents: [f64; 3], yaw: f64) -> Result<Self> {
        if !center.is_finite() || !yaw.is_finite() {
            return Err(Error::Validation("cuboid has non-finite fields".into()));
        }
        if half_extents.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::Validation(format!(
                "cuboid half extents must be positive, got {half_extents:?}"
            )));
        }
        Ok(Cuboid {
            center,
            half_extents,
            yaw: wrap_angle(yaw),
        })
    }

    /// Axis-aligned box from its min and max corners.
    pub fn from_bounds(min: Point3, max: Point3) -> Result<Self> {
        let c = (min + max) * 0.5;
        let h = (max - min) * 0.5;
        Cuboid::new(c, [h.x, h.y, h.z], 0.0)
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    pub fn half_extents(&self) -> [f64; 3] {
        self.half_extents
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.iter().product::<f64>()
    }

    pub fn with_center(mut self, center: Point3) -> Self {
        self.center = center;
        self
    }

    pub fn with_yaw(mut self, yaw: f64) -> Self {
        self.yaw = wrap_angle(yaw);
        self
    }

    pub fn with_half_extents(self, half_extents: [f64; 3]) -> Result<Self> {
        Cuboid::new(self.center, half_extents, self.yaw)
    }

    /// Local x and y axes in world coordinates.
    fn axes(&self) -> (Point2, Point2) {
        let (s, c) = self.yaw.sin_cos();
        (Point2::new(c, s), Point2::new(-s, c))
    }

    /// The 8 corners. Index bits select the sign of each local axis:
    /// bit 0 → x, bit 1 → y, bit 2 → z (set means `+`).
    pub fn corners(&self) -> [Point3; 8] {
        let (ax, ay) = self.axes();
        let [hx, hy, hz] = self.half_extents;
        std::array::from_fn(|i| {
            let sx = if i & 1 != 0 { hx } else { -hx };
            let sy = if i & 2 != 0 { hy } else { -hy };
            let sz = if i & 4 != 0 { hz } else { -hz };
            Point3::new(
                self.center.x + ax.x * sx + ay.x * sy,
                self.center.y + ax.y * sx + ay.y * sy,
                self.center.z + sz,
            )
        })
    }

    /// `p` expressed in the box frame, relative to the center.
    pub fn to_local(&self, p: Point3) -> Point3 {
        let (ax, ay) = self.axes();
        let d = p - self.center;
        let d2 = Point2::new(d.x, d.y);
        Point3::new(d2.dot(ax), d2.dot(ay), d.z)
    }

    /// Strict interior test.
    pub fn contains_strict(&self, p: Point3) -> bool {
        let l = self.to_local(p);
        l.x.abs() < self.half_extents[0] && l.y.abs() < self.half_extents[1] && l.z.abs() < self.half_extents[2]
    }

    /// Containment with every face pushed outward by `tol`.
    pub fn contains_within(&self, p: Point3, tol: f64) -> bool {
        let l = self.to_local(p);
        l.x.abs() <= self.half_extents[0] + tol
            && l.y.abs() <= self.half_extents[1] + tol
            && l.z.abs() <= self.half_extents[2] + tol
    }

    /// Twelve outward-facing triangles covering the surface.
    pub fn triangles(&self) -> [[Point3; 3]; 12] {
        let c = self.corners();
        // faces as corner-index quads, counter-clockwise seen from outside
        const QUADS: [[usize; 4]; 6] = [
            [0, 2, 3, 1], // -z
            [4, 5, 7, 6], // +z
            [0, 1, 5, 4], // -y
            [2, 6, 7, 3], // +y
            [0, 4, 6, 2], // -x
            [1, 3, 7, 5], // +x
        ];
        let mut out = [[Point3::ZERO; 3]; 12];
        for (f, q) in QUADS.iter().enumerate() {
            out[2 * f] = [c[q[0]], c[q[1]], c[q[2]]];
            out[2 * f + 1] = [c[q[0]], c[q[2]], c[q[3]]];
        }
        out
    }

    pub fn bounding_radius(&self) -> f64 {
        let [a, b, c] = self.half_extents;
        (a * a + b * b + c * c).sqrt()
    }
}

/// Projects every corner of every cuboid onto `plane`.
///
/// Output order is cuboid order, then corner index, so the result has
/// exactly `8 * cuboids.len()` points.
pub fn project_cuboids(cuboids: &[Cuboid], plane: Plane) -> Result<Vec<Point2>> {
    if cuboids.is_empty() {
        return Err(Error::EmptyInput("no cuboids to project"));
    }
    Ok(cuboids
        .iter()
        .flat_map(|c| c.corners())
        .map(|p| plane.project(p))
        .collect())
}

/// Volume-weighted mean of the cuboid centers.
pub fn cuboids_centroid(cuboids: &[Cuboid]) -> Option<Point3> {
    let total: f64 = cuboids.iter().map(Cuboid::volume).sum();
    if cuboids.is_empty() || total <= 0.0 {
        return None;
    }
    let sum = cuboids.iter().fold(Point3::ZERO, |acc, c| acc + c.center * c.volume());
    Some(sum / total)
}

/// Axis-aligned bounds `(min, max)` of all cuboid corners.
pub fn cuboids_bounds(cuboids: &[Cuboid]) -> Option<(Point3, Point3)> {
    let mut it = cuboids.iter().flat_map(|c| c.corners());
    let first = it.next()?;
    Some(it.fold((first, first), |(lo, hi), p| {
        (
            Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z)),
            Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z)),
        )
    }))
}

/// Angle of `v` measured counter-clockwise, folded into `(-π, π]`.
pub(crate) fn wrap_pi(a: f64) -> f64 {
    let w = wrap_angle(a + PI) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}
