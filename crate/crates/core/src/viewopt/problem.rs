use serde::Serialize;

use super::{EnergyConfig, START_ELEVATION};
use crate::error::{Error, Result};
use crate::geometry::{
    alpha_shape, convex_hull, cuboids_centroid, max_diagonal, project_cuboids, Cuboid, Plane, Point2, Point3, Polygon2,
};
use crate::scene::Scene;

/// Target outline on one projection plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneCache {
    pub plane: Plane,
    pub shape: Polygon2,
    pub centroid: Point2,
    pub d_alpha: f64,
}

/// One cuboid projected onto a plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedPart {
    pub polygon: Polygon2,
    pub center: Point2,
}

impl ProjectedPart {
    fn new(c: &Cuboid, plane: Plane) -> Result<Self> {
        let polygon = convex_hull(&project_cuboids(std::slice::from_ref(c), plane)?)?;
        let center = polygon.centroid();
        Ok(ProjectedPart { polygon, center })
    }
}

/// Target and occluder cuboids with every projection precomputed.
#[derive(Debug, Clone)]
pub struct OptimizationProblem {
    targets: Vec<Cuboid>,
    occluders: Vec<Cuboid>,
    planes: [PlaneCache; 3],
    target_parts: [Vec<ProjectedPart>; 3],
    occluder_parts: [Vec<ProjectedPart>; 3],
    centroid: Point3,
    d_alpha_star: f64,
    config: EnergyConfig,
}

impl OptimizationProblem {
    pub fn new(targets: Vec<Cuboid>, occluders: Vec<Cuboid>, config: EnergyConfig) -> Result<Self> {
        config.validate()?;
        if targets.is_empty() {
            return Err(Error::EmptyInput("optimization needs at least one target cuboid"));
        }
        let cache = |plane: Plane| -> Result<PlaneCache> {
            let shape = alpha_shape(&project_cuboids(&targets, plane)?)?;
            let d_alpha = max_diagonal(&shape);
            Ok(PlaneCache {
                plane,
                centroid: shape.centroid(),
                shape,
                d_alpha,
            })
        };
        let planes = [cache(Plane::XY)?, cache(Plane::XZ)?, cache(Plane::YZ)?];
        let parts = |cs: &[Cuboid], plane: Plane| -> Result<Vec<ProjectedPart>> {
            cs.iter().map(|c| ProjectedPart::new(c, plane)).collect()
        };
        let target_parts = [
            parts(&targets, Plane::XY)?,
            parts(&targets, Plane::XZ)?,
            parts(&targets, Plane::YZ)?,
        ];
        let occluder_parts = [
            parts(&occluders, Plane::XY)?,
            parts(&occluders, Plane::XZ)?,
            parts(&occluders, Plane::YZ)?,
        ];
        let d_alpha_star = planes.iter().map(|p| p.d_alpha).fold(0.0, f64::max);
        let centroid = cuboids_centroid(&targets).expect("non-empty targets");
        Ok(OptimizationProblem {
            targets,
            occluders,
            planes,
            target_parts,
            occluder_parts,
            centroid,
            d_alpha_star,
            config,
        })
    }

    pub fn targets(&self) -> &[Cuboid] {
        &self.targets
    }

    pub fn occluders(&self) -> &[Cuboid] {
        &self.occluders
    }

    pub fn planes(&self) -> &[PlaneCache; 3] {
        &self.planes
    }

    pub fn plane(&self, plane: Plane) -> &PlaneCache {
        &self.planes[plane_index(plane)]
    }

    pub fn target_parts(&self, plane: Plane) -> &[ProjectedPart] {
        &self.target_parts[plane_index(plane)]
    }

    pub fn occluder_parts(&self, plane: Plane) -> &[ProjectedPart] {
        &self.occluder_parts[plane_index(plane)]
    }

    /// Volume-weighted centroid of the target cuboids.
    pub fn centroid(&self) -> Point3 {
        self.centroid
    }

    /// Largest per-plane outline diameter; the scalar length scale.
    pub fn d_alpha_star(&self) -> f64 {
        self.d_alpha_star
    }

    pub fn config(&self) -> &EnergyConfig {
        &self.config
    }

    pub fn with_config(&self, config: EnergyConfig) -> Result<Self> {
        config.validate()?;
        let mut p = self.clone();
        p.config = config;
        Ok(p)
    }

    /// Whether `p` is strictly inside any occluder cuboid.
    pub fn inside_occluder(&self, p: Point3) -> bool {
        self.occluders.iter().any(|c| c.contains_strict(p))
    }
}

pub(crate) fn plane_index(plane: Plane) -> usize {
    match plane {
        Plane::XY => 0,
        Plane::XZ => 1,
        Plane::YZ => 2,
    }
}

/// Starting points evenly spaced in azimuth (from 0) on the circle at
/// distance `d_alpha_star` from the target centroid, 60° above the ground.
pub fn initial_positions(problem: &OptimizationProblem) -> Vec<Point3> {
    let n = problem.config.starts;
    let r = problem.d_alpha_star;
    let c = problem.centroid;
    let (se, ce) = START_ELEVATION.sin_cos();
    (0..n)
        .map(|k| {
            let az = std::f64::consts::TAU * k as f64 / n as f64;
            let (sa, ca) = az.sin_cos();
            Point3::new(c.x + r * ce * ca, c.y + r * ce * sa, c.z + r * se)
        })
        .collect()
}

/// Builds the problem for `target_id`: occluders are the cuboids of every
/// other building whose centroid lies within
/// `neighbor_radius_factor * d_alpha_star` of the target centroid.
pub fn filter_neighbors(scene: &Scene, target_id: &str, config: &EnergyConfig) -> Result<OptimizationProblem> {
    let target = scene.building(target_id)?;
    let probe = OptimizationProblem::new(target.cuboids.clone(), Vec::new(), *config)?;
    let radius = config.neighbor_radius_factor * probe.d_alpha_star;
    let occluders: Vec<Cuboid> = scene
        .buildings
        .iter()
        .filter(|b| b.id != target_id)
        .filter(|b| b.centroid().distance(probe.centroid) <= radius)
        .flat_map(|b| b.cuboids.iter().copied())
        .collect();
    OptimizationProblem::new(target.cuboids.clone(), occluders, *config)
}
