//! BFGS over a 3D point with finite-difference gradients and a floor on z.

use crate::geometry::Point3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub max_iterations: usize,
    /// Central-difference step.
    pub gradient_step: f64,
    /// Stop when `|g| < gradient_tol * max(1, |f|)`.
    pub gradient_tol: f64,
    /// Stop when an accepted step is shorter than this.
    pub step_tol: f64,
    /// Longest trial step; longer search directions are rescaled.
    pub max_step: f64,
    pub armijo: f64,
    pub shrink: f64,
    /// Iterates are projected onto `z >= min_z`.
    pub min_z: f64,
}

impl MinimizeOptions {
    /// Settings scaled to a problem length `scale`.
    pub fn for_scale(scale: f64, max_iterations: usize, min_z: f64) -> Self {
        MinimizeOptions {
            max_iterations,
            gradient_step: 1e-4 * scale,
            gradient_tol: 1e-6,
            step_tol: 1e-9 * scale,
            max_step: scale,
            armijo: 1e-4,
            shrink: 0.5,
            min_z,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub x: Point3,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted step, starting with the start value.
    pub trace: Vec<f64>,
}

type Mat3 = [[f64; 3]; 3];

const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn mat_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn gradient(f: &impl Fn(Point3) -> f64, x: Point3, h: f64) -> [f64; 3] {
    let axes = [Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0), Point3::Z];
    axes.map(|e| (f(x + e * h) - f(x - e * h)) / (2.0 * h))
}

/// Minimizes `f` from `x0`. Every accepted step satisfies the Armijo
/// condition and never increases `f`, so `trace` is non-increasing.
pub fn minimize(f: impl Fn(Point3) -> f64, x0: Point3, opts: &MinimizeOptions) -> MinimizeResult {
    let project = |p: Point3| Point3::new(p.x, p.y, p.z.max(opts.min_z));
    let mut x = project(x0);
    let mut fx = f(x);
    let mut trace = vec![fx];
    let mut h_inv = IDENTITY;
    let mut first_update = true;
    let mut g = gradient(&f, x, opts.gradient_step);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        if !fx.is_finite() {
            break;
        }
        // drop the component pushing into the floor
        let at_floor = x.z <= opts.min_z;
        let mut g_eff = g;
        if at_floor && g_eff[2] > 0.0 {
            g_eff[2] = 0.0;
        }
        let gnorm = dot(g_eff, g_eff).sqrt();
        if gnorm < opts.gradient_tol * fx.abs().max(1.0) {
            converged = true;
            break;
        }
        let mut d = mat_vec(&h_inv, g_eff).map(|v| -v);
        if at_floor && d[2] < 0.0 {
            d[2] = 0.0;
        }
        if dot(d, g_eff) >= 0.0 {
            h_inv = IDENTITY;
            first_update = true;
            d = g_eff.map(|v| -v);
        }
        let dn = dot(d, d).sqrt();
        if dn > opts.max_step {
            d = d.map(|v| v * opts.max_step / dn);
        }
        let dir = Point3::from(d);

        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha * dir.norm() >= opts.step_tol {
            let trial = project(x + dir * alpha);
            let ft = f(trial);
            let decrease = dot(g, (trial - x).to_array());
            if ft.is_finite() && ft <= fx + opts.armijo * decrease.min(0.0) && ft <= fx {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= opts.shrink;
        }
        iterations += 1;
        let Some((x_new, f_new)) = accepted else {
            if first_update {
                // no descent even along the gradient at the resolution of step_tol
                converged = true;
                break;
            }
            h_inv = IDENTITY;
            first_update = true;
            continue;
        };
        let fresh = first_update;
        let s = (x_new - x).to_array();
        let g_new = gradient(&f, x_new, opts.gradient_step);
        let y: [f64; 3] = std::array::from_fn(|i| g_new[i] - g[i]);
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(fx);

        let sy = dot(s, y);
        if sy > 1e-12 * dot(s, s).sqrt() * dot(y, y).sqrt() {
            if first_update {
                let scale = sy / dot(y, y);
                h_inv = IDENTITY.map(|r| r.map(|v| v * scale));
                first_update = false;
            }
            // H' = (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ
            let rho = 1.0 / sy;
            let hy = mat_vec(&h_inv, y);
            let yhy = dot(y, hy);
            let mut next = h_inv;
            for i in 0..3 {
                for j in 0..3 {
                    next[i][j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            h_inv = next;
        }
        if dot(s, s).sqrt() < opts.step_tol {
            if fresh {
                converged = true;
                break;
            }
            // a badly scaled curvature estimate can stall the iteration
            h_inv = IDENTITY;
            first_update = true;
        }
    }
    MinimizeResult {
        x,
        f: fx,
        iterations,
        converged,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let c = Point3::new(1.0, -2.0, 3.0);
        let f = |p: Point3| {
            let d = p - c;
            d.x * d.x + 10.0 * d.y * d.y + 0.5 * d.z * d.z + 0.3 * d.x * d.y
        };
        let r = minimize(
            f,
            Point3::new(5.0, 5.0, 5.0),
            &MinimizeOptions::for_scale(1.0, 200, f64::NEG_INFINITY),
        );
        assert!(r.converged);
        assert!(f(r.x) < 1e-8, "f = {}", f(r.x));
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rosenbrock_in_xy() {
        let f = |p: Point3| (1.0 - p.x).powi(2) + 100.0 * (p.y - p.x * p.x).powi(2) + p.z * p.z;
        let r = minimize(
            f,
            Point3::new(-1.2, 1.0, 0.5),
            &MinimizeOptions::for_scale(1.0, 1000, f64::NEG_INFINITY),
        );
        assert!((r.x - Point3::new(1.0, 1.0, 0.0)).norm() < 1e-3, "{:?}", r.x);
    }

    #[test]
    fn floor_is_respected() {
        let f = |p: Point3| p.x * p.x + p.y * p.y + p.z * p.z;
        let r = minimize(
            f,
            Point3::new(1.0, 1.0, 5.0),
            &MinimizeOptions::for_scale(1.0, 200, 2.0),
        );
        assert!(r.converged);
        assert!((r.x.z - 2.0).abs() < 1e-12);
        assert!(r.x.x.abs() < 1e-4 && r.x.y.abs() < 1e-4);
    }

    #[test]
    fn iteration_cap() {
        let f = |p: Point3| (1.0 - p.x).powi(2) + 100.0 * (p.y - p.x * p.x).powi(2) + p.z * p.z;
        let r = minimize(
            f,
            Point3::new(-1.2, 1.0, 0.5),
            &MinimizeOptions::for_scale(1.0, 3, f64::NEG_INFINITY),
        );
        assert_eq!(r.iterations, 3);
        assert!(!r.converged);
    }
}
