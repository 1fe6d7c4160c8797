//! Euler–Maruyama integration of the diffusion approximations: the
//! four-dimensional limit system, the linearised "hat" system and the
//! Feller-type system with absorption.

mod cyeds;
mod feller;
mod hat;

pub use cyeds::{integrate_cyeds, CyedsPlan, SdeState4};
pub use feller::integrate_feller;
pub use hat::{integrate_hat, HatPlan};

use serde::{Deserialize, Serialize};

use crate::deterministic::step_schedule;
use crate::error::{Error, Result};
use crate::trajectory::OutputGrid;

/// Default Euler–Maruyama step, h.
pub const DEFAULT_SDE_STEP: f64 = 1e-3;

/// State of the two-dimensional diffusions: population on the count scale
/// and substrate concentration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionState {
    pub population: f64,
    pub substrate: f64,
}

impl DiffusionState {
    pub fn new(population: f64, substrate: f64) -> Self {
        Self {
            population,
            substrate,
        }
    }
}

pub type HatState = DiffusionState;
pub type FellerState = DiffusionState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeOptions {
    pub dt: f64,
    pub intervals: usize,
    /// Multiplies every Brownian increment. `0` gives the noise-free
    /// scheme; anything but `1` is for testing.
    pub noise_scale: f64,
}

impl Default for SdeOptions {
    fn default() -> Self {
        Self {
            dt: DEFAULT_SDE_STEP,
            intervals: OutputGrid::DEFAULT_INTERVALS,
            noise_scale: 1.0,
        }
    }
}

impl SdeOptions {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_intervals(mut self, intervals: usize) -> Self {
        self.intervals = intervals;
        self
    }
}

/// Step layout shared by all three integrators: the same steps as
/// [`step_schedule`], with an output frame every `per_frame` steps.
#[derive(Debug, Clone)]
pub(crate) struct Schedule {
    pub grid: OutputGrid,
    pub steps: Vec<(f64, f64)>,
    pub per_frame: usize,
}

impl Schedule {
    pub fn new(horizon: f64, opts: &SdeOptions) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Config(format!("horizon must be > 0, got {horizon}")));
        }
        if !(opts.dt > 0.0 && opts.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be > 0, got {}", opts.dt)));
        }
        if opts.intervals == 0 {
            return Err(Error::Config("output grid needs at least one interval".into()));
        }
        if !(opts.noise_scale >= 0.0 && opts.noise_scale.is_finite()) {
            return Err(Error::Config(format!(
                "noise scale must be >= 0, got {}",
                opts.noise_scale
            )));
        }
        let grid = OutputGrid::new(horizon, opts.intervals);
        let ratio = horizon / opts.intervals as f64 / opts.dt;
        let per_frame = ratio.round();
        if per_frame < 1.0 || (ratio - per_frame).abs() > 1e-6 * ratio {
            return Err(Error::Config(format!(
                "output spacing {} is not a whole number of steps of {}",
                horizon / opts.intervals as f64,
                opts.dt
            )));
        }
        let per_frame = per_frame as usize;
        let steps: Vec<(f64, f64)> = step_schedule(horizon, opts.dt).collect();
        if steps.len() != per_frame * opts.intervals {
            return Err(Error::Config(format!(
                "{} steps do not split into {} frames",
                steps.len(),
                opts.intervals
            )));
        }
        Ok(Self {
            grid,
            steps,
            per_frame,
        })
    }

    /// Output frame index reached at the end of step `i`, if any.
    #[inline]
    pub fn frame_after(&self, i: usize) -> Option<usize> {
        (i + 1).is_multiple_of(self.per_frame).then(|| (i + 1) / self.per_frame)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_needs_aligned_grid() {
        let s = Schedule::new(200.0, &SdeOptions::default()).unwrap();
        assert_eq!(s.per_frame, 1000);
        assert_eq!(s.frame_after(999), Some(1));
        assert_eq!(s.frame_after(1000), None);
        let bad = SdeOptions { dt: 0.3, intervals: 10, noise_scale: 1.0 };
        assert!(Schedule::new(1.0, &bad).is_err());
        let bad = SdeOptions { dt: -1.0, ..Default::default() };
        assert!(Schedule::new(1.0, &bad).is_err());
    }
}
