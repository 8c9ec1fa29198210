use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Perspective { fov_y: f64 },
    Orthographic { half_height: f64 },
}

/// Square-aspect pinhole or orthographic camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    position: Point3,
    look_at: Point3,
    up: Point3,
    projection: Projection,
    basis: Basis,
    near: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Basis {
    pub right: Point3,
    pub up: Point3,
    pub forward: Point3,
}

impl Camera {
    pub fn new(position: Point3, look_at: Point3, up: Point3, projection: Projection) -> Result<Self> {
        if !(position.is_finite() && look_at.is_finite() && up.is_finite()) {
            return Err(Error::Validation("camera has non-finite fields".into()));
        }
        let forward = (look_at - position)
            .normalized()
            .ok_or_else(|| Error::Validation("camera position equals look_at".into()))?;
        match projection {
            Projection::Perspective { fov_y } if !(fov_y > 0.0 && fov_y < std::f64::consts::PI) => {
                return Err(Error::Validation(format!("fov_y {fov_y} outside (0, π)")));
            }
            Projection::Orthographic { half_height } if !(half_height > 0.0 && half_height.is_finite()) => {
                return Err(Error::Validation(format!("half_height {half_height} must be positive")));
            }
            _ => {}
        }
        let up = up
            .normalized()
            .ok_or_else(|| Error::Validation("camera up vector is zero".into()))?;
        // fall back to a different reference when looking along `up`
        let right = [up, Point3::new(0.0, 1.0, 0.0), Point3::new(1.0, 0.0, 0.0)]
            .into_iter()
            .find_map(|u| {
                let r = forward.cross(u);
                (r.norm() > 1e-9).then(|| r.normalized()).flatten()
            })
            .expect("some reference axis is not parallel to forward");
        let true_up = right.cross(forward);
        let distance = (look_at - position).norm();
        Ok(Camera {
            position,
            look_at,
            up,
            projection,
            basis: Basis {
                right,
                up: true_up,
                forward,
            },
            near: distance * 1e-4,
        })
    }

    pub fn position(&self) -> Point3 {
        self.position
    }

    pub fn look_at(&self) -> Point3 {
        self.look_at
    }

    pub fn up(&self) -> Point3 {
        self.up
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    pub(crate) fn near(&self) -> f64 {
        self.near
    }

    /// View-space coordinates `(right, up, depth)`.
    pub(crate) fn to_view(self, p: Point3) -> Point3 {
        let d = p - self.position;
        Point3::new(d.dot(self.basis.right), d.dot(self.basis.up), d.dot(self.basis.forward))
    }
}
