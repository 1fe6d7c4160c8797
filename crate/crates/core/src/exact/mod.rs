//! Exact event-driven simulation of the jump models: the mass-structured
//! individual-based model and its Crump–Young count reduction.
//!
//! Both use thinning against a rate bound that is constant between events,
//! with the substrate (and masses) integrated by RK4 between candidates.

mod crump_young;
mod ibm;
mod thinning;

pub use crump_young::{simulate_crump_young, CrumpYoungState};
pub use ibm::{simulate_ibm, PopulationState};
pub use thinning::{next_candidate, thinning_next_event, ThinnedEvent};

use crate::error::{Error, Result};
use crate::fluctuations::TestFunction;
use crate::trajectory::OutputGrid;

/// Largest RK4 step between events, h.
pub const DEFAULT_ODE_STEP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    /// Output frames: `intervals + 1` uniform times on `[0, horizon]`.
    pub intervals: usize,
    pub ode_step: f64,
    /// Keep every event time.
    pub record_events: bool,
    /// Test functions tracked along the path (mass-structured model only).
    pub probes: Vec<TestFunction>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            intervals: OutputGrid::DEFAULT_INTERVALS,
            ode_step: DEFAULT_ODE_STEP,
            record_events: false,
            probes: Vec::new(),
        }
    }
}

impl SimOptions {
    pub fn with_intervals(mut self, intervals: usize) -> Self {
        self.intervals = intervals;
        self
    }

    pub(crate) fn grid(&self, horizon: f64) -> Result<OutputGrid> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Config(format!("horizon must be > 0, got {horizon}")));
        }
        if !(self.ode_step > 0.0 && self.ode_step.is_finite()) {
            return Err(Error::Config(format!(
                "ODE step must be > 0, got {}",
                self.ode_step
            )));
        }
        if self.intervals == 0 {
            return Err(Error::Config("output grid needs at least one interval".into()));
        }
        Ok(OutputGrid::new(horizon, self.intervals))
    }
}

/// Substrate after absorption: `Sin + (S(T0) − Sin) e^{−D(t − T0)}`.
#[inline]
pub(crate) fn washout_substrate(s_in: f64, dilution: f64, s0: f64, elapsed: f64) -> f64 {
    s_in + (s0 - s_in) * (-dilution * elapsed).exp()
}
