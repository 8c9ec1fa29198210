//! Dual-buffer pixel counting for visibility and shading.
//!
//! Each measurement renders two class masks from the same camera: one with
//! only the buildings of interest (`target`), and one with the surrounding
//! geometry as well. The ratio of surviving target pixels is the measure.

mod camera;
mod mask;
mod render;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cuboids_centroid, Cuboid, Point3, Triangle};
use crate::scene::{Building, BuildingRole, Scene};

pub use camera::{Camera, Projection};
pub use mask::{count_pixels, MaskBuffer, PixelClass, PixelCounts, GRID};

pub const DEFAULT_RESOLUTION: usize = 1000;
pub const DEFAULT_FOV_Y: f64 = std::f64::consts::FRAC_PI_3;
/// Fraction of the frame height covered by the framed bounding sphere.
pub const FRAME_FILL: f64 = 0.8;
/// Sun camera distance in multiples of the scene bounding diagonal.
pub const SUN_DISTANCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SunProjection {
    #[default]
    Orthographic,
    Perspective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RasterConfig {
    pub resolution: usize,
    /// Upper bound of the observer field of view, radians.
    pub fov_y: f64,
    pub sun_projection: SunProjection,
}

impl Default for RasterConfig {
    fn default() -> Self {
        RasterConfig {
            resolution: DEFAULT_RESOLUTION,
            fov_y: DEFAULT_FOV_Y,
            sun_projection: SunProjection::Orthographic,
        }
    }
}

impl RasterConfig {
    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        mask::check_resolution(self.resolution)?;
        if !(self.fov_y > 0.0 && self.fov_y < std::f64::consts::PI) {
            return Err(Error::Validation(format!("fov_y {} outside (0, π)", self.fov_y)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderMode {
    TargetOnly,
    FullScene,
}

/// Renders buildings selected by `classify`, in scene order.
pub fn render_classified(
    buildings: &[&Building],
    camera: &Camera,
    resolution: usize,
    classify: impl Fn(&Building) -> Option<PixelClass>,
) -> Result<MaskBuffer> {
    mask::check_resolution(resolution)?;
    let mut items: Vec<(Triangle, PixelClass)> = Vec::new();
    for b in buildings {
        if let Some(class) = classify(b) {
            items.extend(b.render_triangles().into_iter().map(|t| (t, class)));
        }
    }
    Ok(render::rasterize(camera, resolution, &items))
}

pub fn render_mask(
    scene: &Scene,
    camera: &Camera,
    target_id: &str,
    mode: RenderMode,
    resolution: usize,
) -> Result<MaskBuffer> {
    scene.building(target_id)?;
    let all: Vec<&Building> = scene.buildings.iter().collect();
    render_classified(&all, camera, resolution, |b| {
        if b.id == target_id {
            Some(PixelClass::Target)
        } else if mode == RenderMode::FullScene {
            Some(PixelClass::Other)
        } else {
            None
        }
    })
}

fn bounding_radius(cuboids: &[Cuboid], center: Point3) -> f64 {
    cuboids
        .iter()
        .flat_map(|c| c.corners())
        .map(|p| p.distance(center))
        .fold(0.0, f64::max)
}

/// Perspective camera at `viewpoint` aimed at the target centroid. The field
/// of view narrows so the target's bounding sphere spans [`FRAME_FILL`] of
/// the frame, but never exceeds `fov_y`.
pub fn observer_camera(target: &Building, viewpoint: Point3, fov_y: f64) -> Result<Camera> {
    let centre = target.centroid();
    let radius = bounding_radius(&target.cuboids, centre);
    let dist = viewpoint.distance(centre);
    let fov = if dist > radius {
        (2.0 * (radius / dist).asin() / FRAME_FILL).min(fov_y)
    } else {
        fov_y
    };
    Camera::new(viewpoint, centre, Point3::Z, Projection::Perspective { fov_y: fov })
}

/// Ratio of target pixels visible in the full scene to target pixels when
/// rendered alone, seen from `viewpoint`.
pub fn visibility(scene: &Scene, viewpoint: Point3, target_id: &str, config: &RasterConfig) -> Result<f64> {
    config.validate()?;
    let target = scene.building(target_id)?;
    let camera = observer_camera(target, viewpoint, config.fov_y)?;
    let b1 = render_mask(scene, &camera, target_id, RenderMode::TargetOnly, config.resolution)?;
    let b2 = render_mask(scene, &camera, target_id, RenderMode::FullScene, config.resolution)?;
    let counts = count_pixels(&b1, &b2)?;
    if counts.target_only == 0 {
        return Err(Error::DegenerateView(format!(
            "target {target_id:?} covers no pixels from {:?}",
            viewpoint.to_array()
        )));
    }
    Ok(counts.target_in_scene as f64 / counts.target_only as f64)
}

/// Camera looking down the sun ray onto the static targets.
pub fn sun_camera(scene: &Scene, static_ids: &[String], sun: Point3, projection: SunProjection) -> Result<Camera> {
    let sun = sun
        .normalized()
        .ok_or_else(|| Error::Validation("sun direction is zero".into()))?;
    if sun.z < 0.0 {
        return Err(Error::NightTime {
            elevation_deg: sun.z.asin().to_degrees(),
        });
    }
    let mut cuboids = Vec::new();
    for id in static_ids {
        cuboids.extend(scene.building(id)?.cuboids.iter().copied());
    }
    let centre = cuboids_centroid(&cuboids).ok_or(Error::EmptyInput("no static targets for shading"))?;
    let radius = bounding_radius(&cuboids, centre);
    let distance = SUN_DISTANCE_FACTOR * scene.bounding_diagonal().max(radius);
    let position = centre + sun * distance;
    let projection = match projection {
        SunProjection::Orthographic => Projection::Orthographic {
            half_height: radius / FRAME_FILL,
        },
        SunProjection::Perspective => Projection::Perspective {
            fov_y: 2.0 * (radius / distance).asin() / FRAME_FILL,
        },
    };
    Camera::new(position, centre, Point3::Z, projection)
}

/// Fraction of the sunlit static-target surface that the candidate puts
/// into shadow: `1 - lit_with / lit_without`.
///
/// Both renders contain every building except the candidate; the second adds
/// the candidate. `candidate_id = None` measures the scene as is (always 0).
pub fn shading(
    scene: &Scene,
    candidate_id: Option<&str>,
    sun: Point3,
    static_ids: &[String],
    config: &RasterConfig,
) -> Result<f64> {
    config.validate()?;
    if let Some(id) = candidate_id {
        scene.building(id)?;
        if static_ids.iter().any(|s| s == id) {
            return Err(Error::Validation(format!("candidate {id:?} is also a static target")));
        }
    }
    let camera = sun_camera(scene, static_ids, sun, config.sun_projection)?;
    let all: Vec<&Building> = scene.buildings.iter().collect();
    let is_target = |b: &Building| static_ids.contains(&b.id);
    let is_candidate = |b: &Building| candidate_id == Some(b.id.as_str());
    let b1 = render_classified(&all, &camera, config.resolution, |b| {
        if is_candidate(b) {
            None
        } else if is_target(b) {
            Some(PixelClass::Target)
        } else {
            Some(PixelClass::Other)
        }
    })?;
    let b2 = render_classified(&all, &camera, config.resolution, |b| {
        if is_target(b) {
            Some(PixelClass::Target)
        } else {
            Some(PixelClass::Other)
        }
    })?;
    let counts = count_pixels(&b1, &b2)?;
    if counts.target_only == 0 {
        return Err(Error::DegenerateView("static targets are not lit".into()));
    }
    Ok((1.0 - counts.target_in_scene as f64 / counts.target_only as f64).clamp(0.0, 1.0))
}

/// Default shading targets: every static-role building.
pub fn default_static_ids(scene: &Scene) -> Vec<String> {
    scene.ids_with_role(BuildingRole::Static)
}
