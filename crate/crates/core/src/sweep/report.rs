use std::path::Path;

use chrono::{NaiveDate, NaiveTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cache::{CachedSample, SweepCache};
use super::{enumerate_variations, resample_path, CandidatePose, DesignVariation};
use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::raster::{default_static_ids, shading, visibility, RasterConfig};
use crate::scene::Scene;
use crate::solar::{sun_schedule, SunSample};

pub const SCHEMA_VERSION: u32 = 1;

/// Shading axis: sample times in order. Front-ends bend it into an arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis {
    pub arc: bool,
    pub times: Vec<NaiveTime>,
    pub samples: Vec<SunSample>,
}

/// Visibility axis: viewpoints in path order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathAxis {
    pub order: Vec<usize>,
    pub points: Vec<Point3>,
    pub eye_height: f64,
}

/// Uniform bins over `[0, 1]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Samples that have no value (night, or failed).
    pub missing: u64,
    /// All samples: `counts` plus `missing`.
    pub total: u64,
}

impl Histogram {
    pub fn from_values<'a>(values: impl IntoIterator<Item = &'a Option<f64>>, bins: usize) -> Histogram {
        let mut counts = vec![0u64; bins];
        let mut missing = 0;
        let mut total = 0;
        for v in values {
            total += 1;
            match v {
                Some(x) => counts[((x * bins as f64) as usize).min(bins - 1)] += 1,
                None => missing += 1,
            }
        }
        Histogram {
            edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
            counts,
            missing,
            total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationSeries {
    pub variation: DesignVariation,
    pub pose: CandidatePose,
    /// One value per time-axis sample; `null` at night or on failure.
    pub shading: Vec<Option<f64>>,
    /// One value per path viewpoint.
    pub visibility: Vec<Option<f64>>,
}

/// The design being edited, measured at its current pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedDesign {
    pub pose: CandidatePose,
    /// The sweep variation with exactly this pose, if any.
    pub variation: Option<usize>,
    pub shading: Vec<Option<f64>>,
    pub visibility: Vec<Option<f64>>,
}

/// The values one PCP polyline passes through.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub variation: usize,
    pub orientation_index: usize,
    pub scale_index: usize,
    pub shading: Option<f64>,
    pub visibility: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub candidate_id: String,
    pub landmark_id: Option<String>,
    pub static_ids: Vec<String>,
    pub date: NaiveDate,
    /// SHA-256 of the scene, candidate, date and measurement settings.
    pub fingerprint: String,
    pub time_axis: TimeAxis,
    pub path_axis: PathAxis,
    /// Landmark visibility with the candidate removed.
    pub baseline_visibility: Vec<Option<f64>>,
    pub variations: Vec<VariationSeries>,
    pub shading_histogram: Histogram,
    pub visibility_histogram: Histogram,
    pub selected: Option<SelectedDesign>,
    pub diagnostics: Vec<String>,
}

impl AnalysisReport {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let r: AnalysisReport = serde_json::from_str(&text)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "report schema {} is not supported (expected {SCHEMA_VERSION})",
                r.schema_version
            )));
        }
        Ok(r)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn polyline(&self, variation: usize, time_index: usize, path_index: Option<usize>) -> Result<Polyline> {
        let v = self
            .variations
            .get(variation)
            .ok_or_else(|| Error::NotFound(format!("variation {variation}")))?;
        let shading = *v
            .shading
            .get(time_index)
            .ok_or_else(|| Error::NotFound(format!("time index {time_index}")))?;
        let visibility = match path_index {
            Some(i) => *v
                .visibility
                .get(i)
                .ok_or_else(|| Error::NotFound(format!("path index {i}")))?,
            None => None,
        };
        Ok(Polyline {
            variation,
            orientation_index: v.variation.orientation_index,
            scale_index: v.variation.scale_index,
            shading,
            visibility,
        })
    }
}

pub fn export_report(report: &AnalysisReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_json()? + "\n").map_err(|e| Error::io(path, e))
}

/// Everything the per-sample measurements depend on.
struct Plan {
    scene: Scene,
    candidate_index: usize,
    candidate_id: String,
    landmark_id: Option<String>,
    static_ids: Vec<String>,
    suns: Vec<SunSample>,
    path: Vec<Point3>,
    viewpoints: Vec<Point3>,
    raster: RasterConfig,
    fingerprint: String,
}

#[derive(Clone, Copy)]
enum Kind {
    Shading,
    Visibility,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Shading => "shading",
            Kind::Visibility => "visibility",
        }
    }
}

fn fingerprint(scene: &Scene, candidate_id: &str, date: NaiveDate, config: &EngineConfig) -> Result<String> {
    let mut h = Sha256::new();
    h.update(scene.to_json()?.as_bytes());
    h.update([0]);
    h.update(candidate_id.as_bytes());
    h.update([0]);
    h.update(date.to_string().as_bytes());
    h.update([0]);
    let settings = (
        &config.raster,
        &config.sweep,
        &config.solar.window,
        config.solar.utc_offset_minutes,
    );
    h.update(serde_json::to_string(&settings)?.as_bytes());
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

impl Plan {
    fn new(scene: &Scene, candidate_id: &str, date: NaiveDate, config: &EngineConfig) -> Result<Plan> {
        config.validate()?;
        let candidate_index = scene
            .buildings
            .iter()
            .position(|b| b.id == candidate_id)
            .ok_or_else(|| Error::NotFound(format!("building {candidate_id:?}")))?;
        let static_ids: Vec<String> = default_static_ids(scene)
            .into_iter()
            .filter(|id| id != candidate_id)
            .collect();
        let o = scene.origin;
        let suns = sun_schedule(o.lat, o.lon, date, config.solar.offset(o.lon), &config.solar.window)?;
        let path = match (config.sweep.path_step, scene.path.len()) {
            (Some(step), n) if n >= 2 => resample_path(&scene.path, step)?,
            _ => scene.path.clone(),
        };
        let lift = Point3::new(0.0, 0.0, config.sweep.eye_height);
        let viewpoints: Vec<Point3> = path.iter().map(|p| *p + lift).collect();
        let landmark_id = if viewpoints.is_empty() {
            scene.landmark().ok().map(|b| b.id.clone())
        } else {
            Some(scene.landmark()?.id.clone())
        };
        if landmark_id.as_deref() == Some(candidate_id) {
            return Err(Error::Validation(format!("candidate {candidate_id:?} is the landmark")));
        }
        Ok(Plan {
            scene: scene.clone(),
            candidate_index,
            candidate_id: candidate_id.to_string(),
            landmark_id,
            static_ids,
            suns,
            path,
            viewpoints,
            raster: config.raster,
            fingerprint: fingerprint(scene, candidate_id, date, config)?,
        })
    }

    fn posed(&self, pose: &CandidatePose) -> Result<Scene> {
        let mut s = self.scene.clone();
        s.buildings[self.candidate_index] = pose.apply(&self.scene.buildings[self.candidate_index])?;
        Ok(s)
    }

    fn without_candidate(&self) -> Scene {
        let mut s = self.scene.clone();
        s.buildings.remove(self.candidate_index);
        s
    }

    fn measure(&self, scene: &Scene, candidate: Option<&str>, kind: Kind, index: usize) -> CachedSample {
        let result = match kind {
            Kind::Shading => {
                let sun = &self.suns[index];
                if sun.is_night() {
                    return CachedSample::default();
                }
                shading(scene, candidate, sun.direction(), &self.static_ids, &self.raster)
            }
            Kind::Visibility => {
                let target = self.landmark_id.as_deref().expect("visibility requires a landmark");
                visibility(scene, self.viewpoints[index], target, &self.raster)
            }
        };
        match result {
            Ok(v) => CachedSample {
                value: Some(v),
                diagnostic: None,
            },
            Err(e) => CachedSample {
                value: None,
                diagnostic: Some(format!("{} {index}: {e}", kind.name())),
            },
        }
    }

    fn jobs(&self) -> Vec<(Kind, usize)> {
        (0..self.suns.len())
            .map(|i| (Kind::Shading, i))
            .chain((0..self.viewpoints.len()).map(|i| (Kind::Visibility, i)))
            .collect()
    }

    /// Shading and visibility series for one candidate pose.
    fn series(&self, pose: &CandidatePose) -> Result<(Vec<CachedSample>, Vec<CachedSample>)> {
        let scene = self.posed(pose)?;
        let id = Some(self.candidate_id.as_str());
        let samples: Vec<CachedSample> = self
            .jobs()
            .into_par_iter()
            .map(|(k, i)| self.measure(&scene, id, k, i))
            .collect();
        let (sh, vis) = samples.split_at(self.suns.len());
        Ok((sh.to_vec(), vis.to_vec()))
    }
}

fn values(samples: &[CachedSample]) -> Vec<Option<f64>> {
    samples.iter().map(|s| s.value).collect()
}

fn notes(label: &str, samples: &[CachedSample], out: &mut Vec<String>) {
    out.extend(
        samples
            .iter()
            .filter_map(|s| s.diagnostic.as_ref())
            .map(|d| format!("{label}: {d}")),
    );
}

/// Runs every variation of `candidate_id` on `date`.
pub fn run_sweep(scene: &Scene, candidate_id: &str, date: NaiveDate, config: &EngineConfig) -> Result<AnalysisReport> {
    run_sweep_cached(scene, candidate_id, date, config, None)
}

/// As [`run_sweep`], reusing and filling `cache`.
pub fn run_sweep_cached(
    scene: &Scene,
    candidate_id: &str,
    date: NaiveDate,
    config: &EngineConfig,
    cache: Option<&mut SweepCache>,
) -> Result<AnalysisReport> {
    let plan = Plan::new(scene, candidate_id, date, config)?;
    let variations = enumerate_variations(scene, candidate_id)?;
    let posed: Vec<Scene> = variations
        .par_iter()
        .map(|v| plan.posed(&v.pose(&config.sweep)))
        .collect::<Result<_>>()?;

    let jobs = plan.jobs();
    let all: Vec<(usize, Kind, usize)> = (0..variations.len())
        .flat_map(|v| jobs.iter().map(move |&(k, i)| (v, k, i)))
        .collect();
    let key = |v: usize, k: Kind, i: usize| SweepCache::key(&plan.fingerprint, v, k.name(), i);
    let cached: Vec<Option<CachedSample>> = all
        .iter()
        .map(|&(v, k, i)| cache.as_deref().and_then(|c| c.get(&key(v, k, i)).cloned()))
        .collect();
    let id = Some(candidate_id);
    let samples: Vec<CachedSample> = all
        .par_iter()
        .zip(cached.par_iter())
        .map(|(&(v, k, i), hit)| hit.clone().unwrap_or_else(|| plan.measure(&posed[v], id, k, i)))
        .collect();
    if let Some(c) = cache {
        c.retain_fingerprint(&plan.fingerprint);
        for (&(v, k, i), s) in all.iter().zip(&samples) {
            c.insert(key(v, k, i), s.clone());
        }
    }

    let base_scene = plan.without_candidate();
    let baseline: Vec<CachedSample> = (0..plan.viewpoints.len())
        .into_par_iter()
        .map(|i| plan.measure(&base_scene, None, Kind::Visibility, i))
        .collect();

    let mut diagnostics = Vec::new();
    notes("baseline", &baseline, &mut diagnostics);
    let per = jobs.len();
    let series: Vec<VariationSeries> = variations
        .into_iter()
        .enumerate()
        .map(|(vi, variation)| {
            let chunk = &samples[vi * per..(vi + 1) * per];
            let (sh, vis) = chunk.split_at(plan.suns.len());
            notes(&format!("variation {vi}"), chunk, &mut diagnostics);
            VariationSeries {
                pose: variation.pose(&config.sweep),
                variation,
                shading: values(sh),
                visibility: values(vis),
            }
        })
        .collect();

    let bins = config.sweep.histogram_bins;
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        candidate_id: candidate_id.to_string(),
        landmark_id: plan.landmark_id.clone(),
        static_ids: plan.static_ids.clone(),
        date,
        fingerprint: plan.fingerprint.clone(),
        time_axis: TimeAxis {
            arc: true,
            times: config.solar.window.times(),
            samples: plan.suns.clone(),
        },
        path_axis: PathAxis {
            order: (0..plan.viewpoints.len()).collect(),
            points: plan.path.clone(),
            eye_height: config.sweep.eye_height,
        },
        baseline_visibility: values(&baseline),
        shading_histogram: Histogram::from_values(series.iter().flat_map(|s| &s.shading), bins),
        visibility_histogram: Histogram::from_values(series.iter().flat_map(|s| &s.visibility), bins),
        variations: series,
        selected: None,
        diagnostics,
    })
}

/// Measures the candidate at an edited `pose` and stores it as the selected
/// design of a copy of `report`. The variation series are left untouched.
pub fn recompute(
    report: &AnalysisReport,
    scene: &Scene,
    pose: CandidatePose,
    config: &EngineConfig,
) -> Result<AnalysisReport> {
    let plan = Plan::new(scene, &report.candidate_id, report.date, config)?;
    if plan.fingerprint != report.fingerprint {
        return Err(Error::Validation(
            "scene or settings differ from the ones the report was computed with".into(),
        ));
    }
    let (sh, vis) = plan.series(&pose)?;
    let mut out = report.clone();
    out.selected = Some(SelectedDesign {
        pose,
        variation: report.variations.iter().position(|v| v.pose == pose),
        shading: values(&sh),
        visibility: values(&vis),
    });
    Ok(out)
}
