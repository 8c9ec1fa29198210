//! Design-variation sweeps of a candidate building.
//!
//! Each candidate is tried at six orientations (steps of π/3 about its
//! footprint centroid) and three uniform scales. For every variation the
//! sweep records shading over the day's sun schedule and landmark
//! visibility from every viewpoint along the observation path, then bins
//! both into histograms for a parallel-coordinates front-end.

mod cache;
mod report;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::scene::{Building, Scene};

pub use cache::SweepCache;
pub use report::{
    export_report, recompute, run_sweep, run_sweep_cached, AnalysisReport, Histogram, PathAxis, Polyline,
    SelectedDesign, TimeAxis, VariationSeries, SCHEMA_VERSION,
};

/// Orientations per candidate, `2π / ORIENTATIONS` apart.
pub const ORIENTATIONS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub scale_factors: [f64; 3],
    pub histogram_bins: usize,
    /// Added to the path z to get the observer's eye.
    pub eye_height: f64,
    /// Arc-length spacing of path viewpoints; `None` uses the path as given.
    pub path_step: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            scale_factors: [0.8, 1.0, 1.2],
            histogram_bins: 10,
            eye_height: 1.7,
            path_step: Some(20.0),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scale_factors.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Validation(format!(
                "scale factors must be positive, got {:?}",
                self.scale_factors
            )));
        }
        if self.histogram_bins == 0 {
            return Err(Error::Validation("histogram_bins must be at least 1".into()));
        }
        if !self.eye_height.is_finite() {
            return Err(Error::Validation("eye_height must be finite".into()));
        }
        if let Some(s) = self.path_step {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Validation(format!("path_step must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DesignVariation {
    pub candidate_id: String,
    pub orientation_index: usize,
    pub scale_index: usize,
}

impl DesignVariation {
    /// Position in the (orientation, scale) lexicographic order.
    pub fn index(&self) -> usize {
        self.orientation_index * 3 + self.scale_index
    }

    pub fn pose(&self, config: &SweepConfig) -> CandidatePose {
        CandidatePose {
            yaw: self.orientation_index as f64 * PI / 3.0,
            scale: config.scale_factors[self.scale_index],
        }
    }
}

/// The 18 variations of a candidate in (orientation, scale) order.
pub fn enumerate_variations(scene: &Scene, candidate_id: &str) -> Result<Vec<DesignVariation>> {
    scene.building(candidate_id)?;
    Ok((0..ORIENTATIONS)
        .flat_map(|o| {
            (0..3).map(move |s| DesignVariation {
                candidate_id: candidate_id.to_string(),
                orientation_index: o,
                scale_index: s,
            })
        })
        .collect())
}

/// A candidate edit relative to the building as loaded: a turn about the
/// vertical axis through the footprint centroid, then a uniform scale that
/// keeps the base on the ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidatePose {
    pub yaw: f64,
    pub scale: f64,
}

impl Default for CandidatePose {
    fn default() -> Self {
        CandidatePose { yaw: 0.0, scale: 1.0 }
    }
}

impl CandidatePose {
    pub fn apply(&self, building: &Building) -> Result<Building> {
        let c = building.centroid();
        let (lo, _) = building.bounds();
        let pivot = Point3::new(c.x, c.y, lo.z);
        building
            .rotated_about(pivot, self.yaw)?
            .scaled_about(pivot, [self.scale; 3])
    }
}

/// Points every `step` of arc length along `path`, plus its last point.
pub fn resample_path(path: &[Point3], step: f64) -> Result<Vec<Point3>> {
    if path.len() < 2 {
        return Err(Error::Validation(format!(
            "a path needs at least two points, got {}",
            path.len()
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Validation(format!("step must be positive, got {step}")));
    }
    let lengths: Vec<f64> = path.windows(2).map(|w| w[0].distance(w[1])).collect();
    let total: f64 = lengths.iter().sum();
    if total <= 0.0 {
        return Err(Error::Validation("path has zero length".into()));
    }
    let mut out = vec![path[0]];
    let mut seg = 0;
    let mut seg_start = 0.0;
    let mut k = 1;
    loop {
        let s = k as f64 * step;
        if s >= total * (1.0 - 1e-12) {
            break;
        }
        while seg_start + lengths[seg] < s {
            seg_start += lengths[seg];
            seg += 1;
        }
        let u = (s - seg_start) / lengths[seg];
        out.push(path[seg] + (path[seg + 1] - path[seg]) * u);
        k += 1;
    }
    out.push(*path.last().expect("checked length"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::geometry::Cuboid;
    use crate::scene::{BuildingRole, GeoOrigin};

    #[test]
    fn eighteen_variations_in_order() {
        let c = Cuboid::new(Point3::new(0.0, 0.0, 1.0), [1.0; 3], 0.0).unwrap();
        let scene = Scene::new(
            GeoOrigin { lat: 0.0, lon: 0.0 },
            vec![Building::new("c", BuildingRole::Candidate, vec![c]).unwrap()],
            vec![],
        )
        .unwrap();
        let v = enumerate_variations(&scene, "c").unwrap();
        assert_eq!(v.len(), 18);
        assert!(v.iter().enumerate().all(|(i, d)| d.index() == i));
        let cfg = SweepConfig::default();
        let yaws: Vec<f64> = v.iter().step_by(3).map(|d| d.pose(&cfg).yaw).collect();
        for (k, y) in yaws.iter().enumerate() {
            assert_relative_eq!(*y, k as f64 * PI / 3.0);
        }
        let scales: Vec<f64> = v[..3].iter().map(|d| d.pose(&cfg).scale).collect();
        assert_eq!(scales, vec![0.8, 1.0, 1.2]);
        assert!(matches!(enumerate_variations(&scene, "x"), Err(Error::NotFound(_))));
    }

    #[test]
    fn pose_keeps_base_on_ground() {
        let c = Cuboid::new(Point3::new(3.0, 1.0, 2.0), [2.0, 1.0, 2.0], 0.0).unwrap();
        let b = Building::new("c", BuildingRole::Candidate, vec![c]).unwrap();
        let p = CandidatePose {
            yaw: PI / 2.0,
            scale: 1.5,
        }
        .apply(&b)
        .unwrap();
        let (lo, hi) = p.bounds();
        assert_relative_eq!(lo.z, 0.0, epsilon = 1e-12);
        assert_relative_eq!(hi.z, 6.0, epsilon = 1e-12);
        assert_relative_eq!(p.centroid().x, 3.0, epsilon = 1e-12);
        assert_relative_eq!(p.cuboids[0].yaw(), PI / 2.0, epsilon = 1e-12);
        assert_eq!(CandidatePose::default().apply(&b).unwrap(), b);
    }

    #[test]
    fn straight_path_resamples_evenly() {
        let path = [Point3::ZERO, Point3::new(100.0, 0.0, 0.0)];
        let r = resample_path(&path, 20.0).unwrap();
        assert_eq!(r.len(), 6);
        assert_eq!(r[5], path[1]);
        assert_eq!(resample_path(&path, 500.0).unwrap(), path.to_vec());
        assert!(resample_path(&path[..1], 20.0).is_err());
    }

    #[test]
    fn corner_path_keeps_spacing() {
        let path = [Point3::ZERO, Point3::new(30.0, 0.0, 0.0), Point3::new(30.0, 25.0, 0.0)];
        let r = resample_path(&path, 20.0).unwrap();
        assert_eq!(r.len(), 4);
        assert_relative_eq!(r[1].x, 20.0);
        assert_relative_eq!(r[2].y, 10.0, epsilon = 1e-12);
        assert_eq!(r[3], path[2]);
    }
}
