//! Occlusion-aware viewpoint search.
//!
//! A viewpoint `p` is scored by three energies over the XY, XZ and YZ
//! projections of the target and occluder cuboids:
//!
//! * `E1` keeps `p` at a preferred distance band from the target outline and
//!   prefers a steep view angle,
//! * `E2` blows up when `p` sinks into an occluder,
//! * `E3` charges every (target part, other part) pair by how much their
//!   angular extents seen from `p` overlap.
//!
//! The weighted sum is minimized by BFGS from several starts on a ring above
//! the target; the best end point that is not inside an occluder wins.

mod bfgs;
mod energy;
mod optimize;
mod problem;

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bfgs::{minimize, MinimizeOptions, MinimizeResult};
pub use energy::{
    angular_interval, e1_plane_term, energy_e1, energy_e2, energy_e3, energy_e3_plane, energy_terms, interval_overlap,
    occlusion_pair_term, total_energy, view_elevation, EnergyTerms,
};
pub use optimize::{optimize_problem, optimize_viewpoint, RunSummary, ViewpointOutcome, ViewpointResult};
pub use problem::{filter_neighbors, initial_positions, OptimizationProblem, PlaneCache, ProjectedPart};

/// Exponents are clamped to this magnitude so energies stay finite.
pub const MAX_EXPONENT: f64 = 700.0;

/// Elevation of the ring of starting positions above the target centroid.
pub const START_ELEVATION: f64 = PI / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    pub lambda0: f64,
    pub lambda1: f64,
    /// Preferred view angles; `theta0 + theta1 = π`.
    pub theta0: f64,
    pub theta1: f64,
    /// Preferred distance band in multiples of the per-plane outline diameter.
    pub dmin_factor: f64,
    pub dmax_factor: f64,
    /// Weights of `E1`, `E2`, `E3`.
    pub omega: [f64; 3],
    /// Buildings farther than this many target diameters are ignored.
    pub neighbor_radius_factor: f64,
    pub starts: usize,
    pub max_iterations: usize,
    /// Lower bound on viewpoint height (scene units).
    pub min_altitude: f64,
    /// Distances enter the `E1` and `E2` exponents in multiples of this.
    pub length_unit: f64,
    /// Use `e^θ1 / (e^θ1 + 1)` instead of `1 / (e^θ1 + 1)` in `E3`.
    pub e3_theta1_inverted: bool,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            lambda0: 1.0,
            lambda1: 1.0,
            theta0: FRAC_PI_4,
            theta1: 3.0 * FRAC_PI_4,
            dmin_factor: 0.5,
            dmax_factor: 1.5,
            omega: [1.0, 100.0, 10.0],
            neighbor_radius_factor: 7.0,
            starts: 10,
            max_iterations: 1000,
            min_altitude: 1.0,
            length_unit: 1.0,
            e3_theta1_inverted: false,
        }
    }
}

impl EnergyConfig {
    /// Sets the preferred angle pair from `theta0`, keeping the sum at π.
    pub fn with_theta0(mut self, theta0: f64) -> Self {
        self.theta0 = theta0;
        self.theta1 = PI - theta0;
        self
    }

    pub fn with_omega(mut self, omega: [f64; 3]) -> Self {
        self.omega = omega;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if (self.theta0 + self.theta1 - PI).abs() > 1e-9 {
            return bad(format!(
                "theta0 + theta1 must equal π, got {} + {}",
                self.theta0, self.theta1
            ));
        }
        let weights = [self.lambda0, self.lambda1, self.omega[0], self.omega[1], self.omega[2]];
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("energy weights must be finite and non-negative".into());
        }
        if !(self.dmin_factor.is_finite() && self.dmax_factor.is_finite() && self.dmin_factor < self.dmax_factor) {
            return bad(format!(
                "dmin_factor {} must be below dmax_factor {}",
                self.dmin_factor, self.dmax_factor
            ));
        }
        if self.neighbor_radius_factor.is_nan() || self.neighbor_radius_factor < 0.0 {
            return bad("neighbor_radius_factor must be non-negative".into());
        }
        if self.starts == 0 {
            return bad("at least one start is required".into());
        }
        if !(self.length_unit > 0.0 && self.length_unit.is_finite()) {
            return bad("length_unit must be positive".into());
        }
        if !self.min_altitude.is_finite() {
            return bad("min_altitude must be finite".into());
        }
        Ok(())
    }
}
