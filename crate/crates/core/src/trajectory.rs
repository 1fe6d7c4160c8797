//! Time-stamped state records shared by every model.

use serde::{Deserialize, Serialize};

/// Which model produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Ibm,
    CrumpYoung,
    Ode,
    SdeCyeds,
    SdeHat,
    SdeFeller,
}

impl ModelTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelTag::Ibm => "ibm",
            ModelTag::CrumpYoung => "crump_young",
            ModelTag::Ode => "ode",
            ModelTag::SdeCyeds => "sde_cyeds",
            ModelTag::SdeHat => "sde_hat",
            ModelTag::SdeFeller => "sde_feller",
        }
    }

    /// Whether the model has an absorbing state at zero population.
    pub fn absorbs(&self) -> bool {
        matches!(self, ModelTag::Ibm | ModelTag::CrumpYoung | ModelTag::SdeFeller)
    }
}

impl std::fmt::Display for ModelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One snapshot. `count` is the population (an integer for jump models, a
/// real for diffusions and the ODE); `q`, `r` are the fluctuation
/// coordinates when the model carries them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub time: f64,
    pub count: f64,
    pub substrate: f64,
    pub q: Option<f64>,
    pub r: Option<f64>,
}

impl Frame {
    pub fn new(time: f64, count: f64, substrate: f64) -> Self {
        Self {
            time,
            count,
            substrate,
            q: None,
            r: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Birth (Crump–Young) or division (mass-structured model).
    Birth,
    Death,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
}

/// Uniform output grid `t_i = horizon · i / intervals`, `i = 0..=intervals`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputGrid {
    pub horizon: f64,
    pub intervals: usize,
}

impl OutputGrid {
    pub const DEFAULT_INTERVALS: usize = 200;

    pub fn new(horizon: f64, intervals: usize) -> Self {
        Self {
            horizon,
            intervals: intervals.max(1),
        }
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        if i >= self.intervals {
            self.horizon
        } else {
            self.horizon * i as f64 / self.intervals as f64
        }
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.intervals).map(move |i| self.time(i))
    }
}

/// Per-frame integrals recorded by the mass-structured simulator for one test
/// function `f`; feeds the quadratic-variation check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ProbeRecord {
    /// Index into the probe list the simulation was run with.
    pub probe: usize,
    /// `⟨ν̄_t, f⟩` at each frame.
    pub value: Vec<f64>,
    /// `∫₀ᵗ ⟨ν̄_u, b·J_f − D f + g f'⟩ du` (drift compensator).
    pub drift: Vec<f64>,
    /// Predicted bracket, division part: `∫₀ᵗ ⟨ν̄_u, b·E_Q[J_f²]⟩ du`.
    pub predicted_division: Vec<f64>,
    /// Predicted bracket, withdrawal part: `∫₀ᵗ D ⟨ν̄_u, f²⟩ du`.
    pub predicted_death: Vec<f64>,
    /// Realised bracket from division jumps, `n Σ (Δ⟨ν̄, f⟩)²`.
    pub realized_division: Vec<f64>,
    /// Realised bracket from withdrawal jumps.
    pub realized_death: Vec<f64>,
}

/// A simulated path on the output grid plus event bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub model: ModelTag,
    pub replicate: u64,
    pub frames: Vec<Frame>,
    pub births: u64,
    pub deaths: u64,
    /// First time the population hit zero, for absorbing models.
    pub extinction_time: Option<f64>,
    /// Every event, when requested.
    pub events: Option<Vec<EventRecord>>,
    pub probes: Vec<ProbeRecord>,
    /// Seconds spent producing this path. Not part of any deterministic output.
    pub wall_time: f64,
}

impl Trajectory {
    pub fn new(model: ModelTag, replicate: u64) -> Self {
        Self {
            model,
            replicate,
            frames: Vec::new(),
            births: 0,
            deaths: 0,
            extinction_time: None,
            events: None,
            probes: Vec::new(),
            wall_time: 0.0,
        }
    }

    pub fn event_count(&self) -> u64 {
        self.births + self.deaths
    }

    pub fn last(&self) -> Option<&Frame> {
        self.frames.last()
    }

    /// Frame whose time equals `t` up to `1e-9` relative.
    pub fn frame_at(&self, t: f64) -> Option<&Frame> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.frames.iter().find(|f| (f.time - t).abs() <= tol)
    }

    pub fn frame_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.frames.iter().map(|f| f.time)
    }

    /// Frames strictly increasing in time.
    pub fn is_ordered(&self) -> bool {
        self.frames.windows(2).all(|w| w[1].time > w[0].time)
    }
}
