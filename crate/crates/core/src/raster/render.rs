//! Flat-class z-buffered triangle rasterizer.
//!
//! Vertices are snapped to a 1/256 pixel grid and coverage is decided with
//! exact integer edge functions under the top-left fill rule, so shared
//! edges are never drawn twice or skipped and every count is an exact
//! integer. Rows are rendered in parallel bands; each band walks the
//! triangles in submission order, so the output does not depend on the
//! thread schedule.

use rayon::prelude::*;

use super::camera::{Camera, Projection};
use super::mask::{MaskBuffer, PixelClass};
use crate::geometry::{Point3, Triangle};

const SUBPIXEL: f64 = 256.0;
const BAND_ROWS: usize = 8;

#[derive(Debug, Clone, Copy)]
struct ScreenVertex {
    x: f64,
    y: f64,
    /// Depth key interpolated linearly in screen space; larger is nearer.
    q: f64,
}

#[derive(Debug, Clone, Copy)]
struct Setup {
    v: [[i64; 2]; 3],
    q: [f64; 3],
    area: i64,
    bias: [bool; 3],
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
    class: PixelClass,
}

fn edge(a: [i64; 2], b: [i64; 2], p: [i64; 2]) -> i64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

/// Top-left rule: the edge owns its boundary pixels when its inward normal
/// points right, or straight down in y-down screen space.
fn owns_boundary(a: [i64; 2], b: [i64; 2]) -> bool {
    let nx = -(b[1] - a[1]);
    let ny = b[0] - a[0];
    nx > 0 || (nx == 0 && ny > 0)
}

fn clip_polygon<T: Copy>(poly: &[T], side: impl Fn(&T) -> f64, lerp: impl Fn(&T, &T, f64) -> T) -> Vec<T> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let (a, b) = (&poly[i], &poly[(i + 1) % n]);
        let (sa, sb) = (side(a), side(b));
        if sa >= 0.0 {
            out.push(*a);
        }
        if (sa >= 0.0) != (sb >= 0.0) {
            out.push(lerp(a, b, sa / (sa - sb)));
        }
    }
    out
}

fn setup_triangle(cam: &Camera, size: usize, tri: &Triangle, class: PixelClass, out: &mut Vec<Setup>) {
    let view: Vec<Point3> = tri.iter().map(|&p| cam.to_view(p)).collect();
    let near = cam.near();
    let view = clip_polygon(&view, |v| v.z - near, |a, b, t| *a + (*b - *a) * t);
    if view.len() < 3 {
        return;
    }
    let s = size as f64;
    let screen: Vec<ScreenVertex> = view
        .iter()
        .map(|v| {
            let (nx, ny, q) = match cam.projection() {
                Projection::Perspective { fov_y } => {
                    let t = (0.5 * fov_y).tan();
                    (v.x / (v.z * t), v.y / (v.z * t), 1.0 / v.z)
                }
                Projection::Orthographic { half_height } => (v.x / half_height, v.y / half_height, -v.z),
            };
            ScreenVertex {
                x: (nx + 1.0) * 0.5 * s,
                y: (1.0 - ny) * 0.5 * s,
                q,
            }
        })
        .collect();
    // guard band keeps fixed-point coordinates small
    let lerp = |a: &ScreenVertex, b: &ScreenVertex, t: f64| ScreenVertex {
        x: a.x + (b.x - a.x) * t,
        y: a.y + (b.y - a.y) * t,
        q: a.q + (b.q - a.q) * t,
    };
    let mut poly = screen;
    poly = clip_polygon(&poly, |v| v.x + s, lerp);
    poly = clip_polygon(&poly, |v| 2.0 * s - v.x, lerp);
    poly = clip_polygon(&poly, |v| v.y + s, lerp);
    poly = clip_polygon(&poly, |v| 2.0 * s - v.y, lerp);
    if poly.len() < 3 {
        return;
    }
    let fixed = |v: &ScreenVertex| [(v.x * SUBPIXEL).round() as i64, (v.y * SUBPIXEL).round() as i64];
    for k in 1..poly.len() - 1 {
        let tri = [poly[0], poly[k], poly[k + 1]];
        let mut v = [fixed(&tri[0]), fixed(&tri[1]), fixed(&tri[2])];
        let mut q = [tri[0].q, tri[1].q, tri[2].q];
        let mut area = edge(v[0], v[1], v[2]);
        if area == 0 {
            continue;
        }
        if area < 0 {
            v.swap(1, 2);
            q.swap(1, 2);
            area = -area;
        }
        let min_x = v.iter().map(|p| p[0]).min().unwrap_or(0);
        let max_x = v.iter().map(|p| p[0]).max().unwrap_or(0);
        let min_y = v.iter().map(|p| p[1]).min().unwrap_or(0);
        let max_y = v.iter().map(|p| p[1]).max().unwrap_or(0);
        // pixel i has its center at (i + 0.5) * SUBPIXEL
        let lo = |m: i64| ((m as f64 / SUBPIXEL - 0.5).ceil().max(0.0)) as usize;
        let hi = |m: i64| ((m as f64 / SUBPIXEL - 0.5).floor().min(s - 1.0)).max(-1.0);
        let (x1, y1) = (hi(max_x), hi(max_y));
        if x1 < 0.0 || y1 < 0.0 {
            continue;
        }
        let (x0, y0) = (lo(min_x), lo(min_y));
        let (x1, y1) = (x1 as usize, y1 as usize);
        if x0 > x1 || y0 > y1 {
            continue;
        }
        out.push(Setup {
            v,
            q,
            area,
            bias: [
                owns_boundary(v[1], v[2]),
                owns_boundary(v[2], v[0]),
                owns_boundary(v[0], v[1]),
            ],
            x0,
            x1,
            y0,
            y1,
            class,
        });
    }
}

/// Renders `items` in order with a nearest-wins depth test. Equal depths
/// keep the earlier triangle.
pub(crate) fn rasterize(cam: &Camera, size: usize, items: &[(Triangle, PixelClass)]) -> MaskBuffer {
    let mut setups = Vec::with_capacity(items.len());
    for (tri, class) in items {
        setup_triangle(cam, size, tri, *class, &mut setups);
    }
    let mut pixels = vec![PixelClass::Background; size * size];
    let mut keys = vec![f64::NEG_INFINITY; size * size];
    pixels
        .par_chunks_mut(size * BAND_ROWS)
        .zip(keys.par_chunks_mut(size * BAND_ROWS))
        .enumerate()
        .for_each(|(band, (px, kq))| {
            let row0 = band * BAND_ROWS;
            let rows = px.len() / size;
            for s in &setups {
                let ya = s.y0.max(row0);
                let yb = s.y1.min(row0 + rows - 1);
                if ya > yb {
                    continue;
                }
                for y in ya..=yb {
                    let py = y as i64 * SUBPIXEL as i64 + SUBPIXEL as i64 / 2;
                    for x in s.x0..=s.x1 {
                        let p = [x as i64 * SUBPIXEL as i64 + SUBPIXEL as i64 / 2, py];
                        let w = [
                            edge(s.v[1], s.v[2], p),
                            edge(s.v[2], s.v[0], p),
                            edge(s.v[0], s.v[1], p),
                        ];
                        let inside = (0..3).all(|i| w[i] > 0 || (w[i] == 0 && s.bias[i]));
                        if !inside {
                            continue;
                        }
                        let a = s.area as f64;
                        let q = (w[0] as f64 * s.q[0] + w[1] as f64 * s.q[1] + w[2] as f64 * s.q[2]) / a;
                        let i = (y - row0) * size + x;
                        if q > kq[i] {
                            kq[i] = q;
                            px[i] = s.class;
                        }
                    }
                }
            }
        });
    let perspective = matches!(cam.projection(), Projection::Perspective { .. });
    let depth = keys
        .into_iter()
        .map(|q| {
            if q == f64::NEG_INFINITY {
                f64::INFINITY
            } else if perspective {
                1.0 / q
            } else {
                -q
            }
        })
        .collect();
    MaskBuffer::from_parts(size, pixels, depth)
}
