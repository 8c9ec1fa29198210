//! Two-hand gesture interpretation.
//!
//! Frames carry a hand status (`Point`, `Open`, `Close`), the palm (or
//! fingertip) position and the palm normal. Two `Close` hands manipulate
//! the selected object, two `Open` hands navigate the map. A pair of
//! snapshots `(t0, t1)` is classified by a small decision tree:
//!
//! * the hands moved in roughly the same direction → translate,
//! * the bar between the hands turned → rotate about the vertical axis,
//! * otherwise the bar changed length → scale.
//!
//! Positions are in scene coordinates (z up).

mod ingest;

use std::f64::consts::{FRAC_PI_6, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Point3};
use crate::scene::{Building, BuildingRole};

pub use ingest::{
    ingest, read_trace, write_events, GestureEvent, HandleBarEvent, IngestReport, Navigation, Phase, SceneObject,
};

/// Hands moving within this angle of each other translate.
pub const TRANSLATE_ANGLE: f64 = FRAC_PI_6;

/// Bars turning by more than this angle rotate; less scales.
pub const ROTATE_ANGLE: f64 = PI / 12.0;

/// Hand or bar vectors shorter than this count as no motion.
const MOTION_EPS: f64 = 1e-9;

/// An axis whose share of the initial bar is below this fraction takes the
/// uniform scale factor.
const AXIS_SHARE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hand {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    #[serde(alias = "Point")]
    Point,
    #[serde(alias = "Open")]
    Open,
    #[serde(alias = "Close")]
    Close,
    #[serde(alias = "None")]
    None,
}

/// One tracked hand at one instant. Trace files store one frame per line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureFrame {
    #[serde(rename = "t")]
    pub time: f64,
    pub hand: Hand,
    pub status: Status,
    #[serde(rename = "p")]
    pub position: Point3,
    #[serde(rename = "o")]
    pub orientation: Point3,
}

impl GestureFrame {
    pub fn new(time: f64, hand: Hand, status: Status, position: Point3, orientation: Point3) -> Self {
        GestureFrame {
            time,
            hand,
            status,
            position,
            orientation,
        }
    }

    /// Checks finiteness and, for tracked hands, a unit palm normal.
    pub fn validate(&self) -> Result<()> {
        if !self.time.is_finite() || !self.position.is_finite() {
            return Err(Error::Validation("frame has non-finite time or position".into()));
        }
        if self.status != Status::None && (self.orientation.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::Validation(format!(
                "palm orientation must be unit length, got norm {}",
                self.orientation.norm()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManipulationKind {
    Translate {
        vector: Point3,
    },
    /// Counterclockwise seen from above.
    Rotate {
        angle: f64,
    },
    Scale {
        factors: [f64; 3],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Manipulation {
    #[serde(flatten)]
    pub kind: ManipulationKind,
    pub theta1: f64,
    pub theta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GestureConfig {
    /// Largest pointer-to-object distance that highlights (scene units).
    pub selection_threshold: f64,
    /// Largest palm-normal drift, in degrees, within one operation.
    pub stability_threshold: f64,
    /// Consecutive two-hand frames needed to raise the handle bar.
    pub trigger_frames: usize,
    /// Hand motion (scene units) needed before a moved bar is reported.
    pub min_motion: f64,
    /// Seconds after the last highlight in which an open palm confirms it.
    pub confirm_window: f64,
}

impl Default for GestureConfig {
    fn default() -> Self {
        GestureConfig {
            selection_threshold: 0.5,
            stability_threshold: 15.0,
            trigger_frames: 100,
            min_motion: 0.01,
            confirm_window: 1.0,
        }
    }
}

impl GestureConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.selection_threshold.is_finite() || self.selection_threshold < 0.0 {
            return Err(Error::Validation("selection_threshold must be non-negative".into()));
        }
        if !(self.stability_threshold > 0.0 && self.stability_threshold <= 180.0) {
            return Err(Error::Validation("stability_threshold must be in (0, 180]".into()));
        }
        if self.trigger_frames == 0 {
            return Err(Error::Validation("trigger_frames must be at least 1".into()));
        }
        if !(self.min_motion >= 0.0 && self.min_motion.is_finite()) {
            return Err(Error::Validation("min_motion must be non-negative".into()));
        }
        if !(self.confirm_window >= 0.0 && self.confirm_window.is_finite()) {
            return Err(Error::Validation("confirm_window must be non-negative".into()));
        }
        Ok(())
    }
}

/// Angle between two vectors; `π/2` when either has no length.
fn angle_or_right(a: Point3, b: Point3) -> f64 {
    if a.norm() < MOTION_EPS || b.norm() < MOTION_EPS {
        return PI / 2.0;
    }
    a.angle_to(b).unwrap_or(PI / 2.0)
}

fn ground(v: Point3) -> Point2 {
    Point2::new(v.x, v.y)
}

/// Classifies the motion of both hands from `(gl0, gr0)` to `(gl1, gr1)`.
/// `Ok(None)` means no motion or a degenerate bar.
pub fn classify_pair(
    gl0: &GestureFrame,
    gr0: &GestureFrame,
    gl1: &GestureFrame,
    gr1: &GestureFrame,
) -> Result<Option<Manipulation>> {
    let status = gl0.status;
    if !matches!(status, Status::Open | Status::Close) || [gr0, gl1, gr1].iter().any(|g| g.status != status) {
        return Err(Error::InconsistentGesture(format!(
            "expected four Open or four Close frames, got {:?} {:?} {:?} {:?}",
            gl0.status, gr0.status, gl1.status, gr1.status
        )));
    }
    if gl0.hand != Hand::Left || gl1.hand != Hand::Left || gr0.hand != Hand::Right || gr1.hand != Hand::Right {
        return Err(Error::InconsistentGesture(
            "frames must be ordered left, right, left, right".into(),
        ));
    }
    let vl = gl1.position - gl0.position;
    let vr = gr1.position - gr0.position;
    if vl.norm() < MOTION_EPS && vr.norm() < MOTION_EPS {
        return Ok(None);
    }
    let theta1 = angle_or_right(vl, vr);
    if theta1 < TRANSLATE_ANGLE {
        return Ok(Some(Manipulation {
            kind: ManipulationKind::Translate {
                vector: (vl + vr) * 0.5,
            },
            theta1,
            theta2: 0.0,
        }));
    }
    let v0 = gl0.position - gr0.position;
    let v1 = gl1.position - gr1.position;
    if v0.norm() < MOTION_EPS || v1.norm() < MOTION_EPS {
        return Ok(None);
    }
    let theta2 = v0.angle_to(v1).unwrap_or(0.0);
    if theta2 > ROTATE_ANGLE {
        let (a, b) = (ground(v0), ground(v1));
        let angle = a.cross(b).atan2(a.dot(b));
        return Ok(Some(Manipulation {
            kind: ManipulationKind::Rotate { angle },
            theta1,
            theta2,
        }));
    }
    let uniform = v1.norm() / v0.norm();
    let factors = std::array::from_fn(|i| {
        let (a0, a1) = (v0.component(i).abs(), v1.component(i).abs());
        if a0 > AXIS_SHARE * v0.norm() && a1 > 0.0 {
            a1 / a0
        } else {
            uniform
        }
    });
    Ok(Some(Manipulation {
        kind: ManipulationKind::Scale { factors },
        theta1,
        theta2,
    }))
}

/// Nearest object strictly closer than `threshold` to the pointer; exact
/// ties go to the lexicographically smaller id.
pub fn select<'a>(point_frame: &GestureFrame, objects: &'a [SceneObject], threshold: f64) -> Option<&'a str> {
    objects
        .iter()
        .map(|o| (o.position.distance(point_frame.position), o.id.as_str()))
        .filter(|(d, _)| *d < threshold)
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)))
        .map(|(_, id)| id)
}

/// Whether every palm normal stays within `threshold` radians of the first.
pub fn orientation_stable(frames: &[GestureFrame], threshold: f64) -> bool {
    let Some(first) = frames.first() else {
        return true;
    };
    frames
        .iter()
        .all(|f| first.orientation.angle_to(f.orientation).unwrap_or(0.0) < threshold)
}

/// Applies a manipulation to a candidate building. Rotation and scaling
/// pivot on the building centroid.
pub fn apply_manipulation(building: &Building, m: &Manipulation) -> Result<Building> {
    if building.role != BuildingRole::Candidate {
        return Err(Error::Validation(format!(
            "only candidate buildings can be manipulated, {:?} is {:?}",
            building.id, building.role
        )));
    }
    let c = building.centroid();
    match m.kind {
        ManipulationKind::Translate { vector } => building.translated(vector),
        ManipulationKind::Rotate { angle } => building.rotated_about(c, angle),
        ManipulationKind::Scale { factors } => building.scaled_about(c, factors),
    }
}
