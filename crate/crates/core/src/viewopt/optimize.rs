use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bfgs::{minimize, MinimizeOptions, MinimizeResult};
use super::energy::{energy_terms, total_energy, EnergyTerms};
use super::problem::{filter_neighbors, initial_positions, OptimizationProblem};
use super::EnergyConfig;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::scene::Scene;

/// Relative radius of the perturbation used to restart a run that ended
/// inside an occluder.
const RETRY_RADIUS: f64 = 0.25;

/// Runs whose energies differ by less than this are treated as tied.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewpointResult {
    pub position: Point3,
    pub energy: f64,
    pub terms: EnergyTerms,
    pub start_index: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// What happened to one start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub start_index: usize,
    pub start: Point3,
    pub position: Point3,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the first descent from `start` ended strictly inside an occluder.
    pub inside_occluder: bool,
    /// Whether the run was restarted from a perturbed start; `position` and
    /// `energy` then describe the restarted run.
    pub retried: bool,
    /// Energy after each accepted step of the first descent.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViewpointOutcome {
    pub best: ViewpointResult,
    pub runs: Vec<RunSummary>,
}

fn descend(problem: &OptimizationProblem, start: Point3) -> MinimizeResult {
    let cfg = problem.config();
    let opts = MinimizeOptions::for_scale(problem.d_alpha_star(), cfg.max_iterations, cfg.min_altitude);
    minimize(|p| total_energy(p, problem), start, &opts)
}

fn perturbed(start: Point3, radius: f64, seed: u64, index: usize) -> Point3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    // uniform direction on the sphere
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    start + Point3::new(r * phi.cos(), r * phi.sin(), z) * radius
}

fn run(problem: &OptimizationProblem, index: usize, start: Point3, seed: u64) -> RunSummary {
    let first = descend(problem, start);
    let inside = problem.inside_occluder(first.x);
    let mut summary = RunSummary {
        start_index: index,
        start,
        position: first.x,
        energy: first.f,
        iterations: first.iterations,
        converged: first.converged,
        inside_occluder: inside,
        retried: false,
        trace: first.trace,
    };
    if inside {
        let again = descend(
            problem,
            perturbed(start, RETRY_RADIUS * problem.d_alpha_star(), seed, index),
        );
        summary.retried = true;
        summary.position = again.x;
        summary.energy = again.f;
        summary.iterations += again.iterations;
        summary.converged = again.converged;
    }
    summary
}

/// Descends from every initial position in parallel and keeps the lowest
/// energy end point outside all occluders. `seed` only affects restarts.
pub fn optimize_problem(problem: &OptimizationProblem, seed: u64) -> Result<ViewpointOutcome> {
    let starts = initial_positions(problem);
    let runs: Vec<RunSummary> = starts
        .par_iter()
        .enumerate()
        .map(|(i, &s)| run(problem, i, s, seed))
        .collect();

    let mut best: Option<&RunSummary> = None;
    for r in runs
        .iter()
        .filter(|r| r.energy.is_finite() && !problem.inside_occluder(r.position))
    {
        match best {
            Some(b) if r.energy >= b.energy - TIE_TOLERANCE * b.energy.abs().max(1.0) => {}
            _ => best = Some(r),
        }
    }
    let Some(b) = best else {
        return Err(Error::NoValidViewpoint(format!(
            "all {} runs ended inside an occluder",
            runs.len()
        )));
    };
    let terms = energy_terms(b.position, problem);
    let best = ViewpointResult {
        position: b.position,
        energy: terms.weighted(problem.config().omega),
        terms,
        start_index: b.start_index,
        iterations: b.iterations,
        converged: b.converged,
    };
    Ok(ViewpointOutcome { best, runs })
}

pub fn optimize_viewpoint(
    scene: &Scene,
    target_id: &str,
    config: &EnergyConfig,
    seed: u64,
) -> Result<ViewpointOutcome> {
    let problem = filter_neighbors(scene, target_id, config)?;
    optimize_problem(&problem, seed)
}
