use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{
    find_equilibria, DivisionKernel, DivisionRate, EquilibriumKind, GrowthSpeed, Kinetics,
    MassKinetics,
};
use crate::params::ChemostatParams;
use crate::trajectory::OutputGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Ibm,
    CrumpYoung,
    Ode,
    SdeCyeds,
    SdeHat,
    SdeFeller,
    /// Crump–Young against the linearised SDE over several population sizes.
    Compare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KineticsSpec {
    Monod {
        mu_max: f64,
        half_saturation: f64,
    },
    Haldane {
        mu_max: f64,
        half_saturation: f64,
        inhibition: f64,
    },
    Custom {
        substrate: Vec<f64>,
        rate: Vec<f64>,
    },
}

impl KineticsSpec {
    pub fn build(&self) -> Result<Kinetics> {
        match self {
            KineticsSpec::Monod { mu_max, half_saturation } => Kinetics::monod(*mu_max, *half_saturation),
            KineticsSpec::Haldane { mu_max, half_saturation, inhibition } => {
                Kinetics::haldane(*mu_max, *half_saturation, *inhibition)
            }
            KineticsSpec::Custom { substrate, rate } => Kinetics::custom(substrate.clone(), rate.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GrowthSpec {
    Zero,
    /// `g = μ(s) m` with the cell mass of `[params]`.
    Proportional,
    Logistic { factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DivisionSpec {
    Zero,
    Proportional { factor: f64 },
    MassDependent { factor: f64, exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Uniform,
    Half,
    SymmetricBeta { shape: f64 },
}

/// Mass-structured laws. Leaving `max_mass` out means an unbounded mass
/// space, as the proportional growth law requires.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassSpec {
    pub growth: GrowthSpec,
    pub division: DivisionSpec,
    pub kernel: KernelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_mass: Option<f64>,
    /// Mass of every individual at `t = 0`, g. Defaults to the cell mass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_mass: Option<f64>,
}

impl MassSpec {
    pub fn build(&self, p: &ChemostatParams, kin: Kinetics) -> Result<MassKinetics> {
        let mk = MassKinetics {
            growth_rate: kin,
            growth: match self.growth {
                GrowthSpec::Zero => GrowthSpeed::Zero,
                GrowthSpec::Proportional => GrowthSpeed::Proportional { cell_mass: p.cell_mass },
                GrowthSpec::Logistic { factor } => GrowthSpeed::Logistic { factor },
            },
            division: match self.division {
                DivisionSpec::Zero => DivisionRate::Zero,
                DivisionSpec::Proportional { factor } => DivisionRate::Proportional { factor },
                DivisionSpec::MassDependent { factor, exponent } => {
                    DivisionRate::MassDependent { factor, exponent }
                }
            },
            kernel: match self.kernel {
                KernelSpec::Uniform => DivisionKernel::Uniform,
                KernelSpec::Half => DivisionKernel::Half,
                KernelSpec::SymmetricBeta { shape } => DivisionKernel::SymmetricBeta { shape },
            },
            max_mass: self.max_mass.unwrap_or(f64::INFINITY),
        };
        mk.validate()?;
        Ok(mk)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumChoice {
    Stable,
    Unstable,
}

/// Initial state. Either explicit values or an equilibrium of the ODE; in
/// the latter case `population` and `substrate` are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    /// Individuals in the vessel of volume `scale * volume`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<f64>,
    /// g/l.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substrate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<EquilibriumChoice>,
}

/// A resolved initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialState {
    pub population: f64,
    pub substrate: f64,
}

impl InitSpec {
    pub fn resolve(&self, p: &ChemostatParams, kin: &Kinetics) -> Result<InitialState> {
        if let Some(choice) = self.equilibrium {
            let want = match choice {
                EquilibriumChoice::Stable => EquilibriumKind::StableInterior,
                EquilibriumChoice::Unstable => EquilibriumKind::UnstableInterior,
            };
            let eq = find_equilibria(kin, p)?
                .into_iter()
                .find(|e| e.kind == want)
                .ok_or_else(|| field_error("equilibrium", format!("no {choice:?} interior equilibrium")))?;
            return Ok(InitialState {
                population: (eq.population * p.scale).round(),
                substrate: eq.substrate,
            });
        }
        let population = self
            .population
            .ok_or_else(|| field_error("population", "required unless `equilibrium` is set"))?;
        let substrate = self
            .substrate
            .ok_or_else(|| field_error("substrate", "required unless `equilibrium` is set"))?;
        if !(population >= 0.0 && population.is_finite()) {
            return Err(field_error("population", format!("must be >= 0, got {population}")));
        }
        if !(substrate >= 0.0 && substrate.is_finite()) {
            return Err(field_error("substrate", format!("must be >= 0, got {substrate}")));
        }
        Ok(InitialState { population, substrate })
    }
}

fn yes() -> bool {
    true
}

fn default_level() -> f64 {
    0.95
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    /// `(Q, R)` columns for the jump models, against the ODE path.
    #[serde(default = "yes")]
    pub fluctuations: bool,
    #[serde(default = "yes")]
    pub qsd: bool,
    #[serde(default = "yes")]
    pub extinction: bool,
    #[serde(default = "yes")]
    pub ellipse: bool,
    /// Tracks `f ≡ 1` and `f(x) = x` along mass-structured runs.
    #[serde(default)]
    pub qv: bool,
    #[serde(default = "default_level")]
    pub ellipse_level: f64,
    /// Conditioning time of the quasi-stationary estimate, h. Defaults to the
    /// horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qsd_time: Option<f64>,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            fluctuations: true,
            qsd: true,
            extinction: true,
            ellipse: true,
            qv: false,
            ellipse_level: default_level(),
            qsd_time: None,
        }
    }
}

/// One population size of a comparison run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeSpec {
    pub label: String,
    /// l.
    pub volume: f64,
    pub population: f64,
    /// g/l. Defaults to `init.substrate`, then to `Sin`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substrate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareSde {
    Hat,
    Feller,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub sizes: Vec<SizeSpec>,
    /// Diffusions run next to Crump–Young at every size.
    #[serde(default = "default_sde")]
    pub sde: Vec<CompareSde>,
}

fn default_sde() -> Vec<CompareSde> {
    vec![CompareSde::Hat]
}

fn default_intervals() -> usize {
    OutputGrid::DEFAULT_INTERVALS
}

fn default_dt() -> f64 {
    crate::sde::DEFAULT_SDE_STEP
}

fn default_ode_dt() -> f64 {
    crate::exact::DEFAULT_ODE_STEP
}

/// Everything a run needs. Parsed from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub replicates: usize,
    /// h.
    pub horizon: f64,
    /// Frames are written at `intervals + 1` uniform times.
    #[serde(default = "default_intervals")]
    pub intervals: usize,
    /// Euler–Maruyama and ODE step of the diffusions, h.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Largest Runge–Kutta step between jumps of the exact simulators, h.
    #[serde(default = "default_ode_dt")]
    pub ode_dt: f64,
    /// Worker threads, `0` for all available cores.
    #[serde(default)]
    pub threads: usize,
    pub params: ChemostatParams,
    pub kinetics: KineticsSpec,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<MassSpec>,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSpec>,
}

/// A validation failure tied to a configuration key.
fn field_error(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("`{key}`: {msg}"))
}

/// Re-key an error raised while building a section, preferring a key the
/// inner message names itself.
fn nested(section: &str, e: Error) -> Error {
    let msg = match e {
        Error::Config(m) | Error::Domain(m) | Error::Kinetics(m) => m,
        other => other.to_string(),
    };
    if msg.starts_with('`') {
        return Error::Config(msg);
    }
    let key = msg.split('`').nth(1).filter(|k| !k.contains(' ')).unwrap_or(section).to_string();
    field_error(&key, msg)
}

impl RunConfig {
    /// Parse and validate. Messages carry the line of the offending key.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(anchor_toml_error(text, &e)))?;
        cfg.validate().map_err(|e| match e {
            Error::Config(msg) => Error::Config(anchor_key(text, &msg)),
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}:{msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(field_error("replicates", "must be at least 1"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(field_error("horizon", format!("must be > 0, got {}", self.horizon)));
        }
        if self.intervals == 0 {
            return Err(field_error("intervals", "must be at least 1"));
        }
        for (key, v) in [("dt", self.dt), ("ode_dt", self.ode_dt)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field_error(key, format!("must be > 0, got {v}")));
            }
        }
        self.params.validate().map_err(|e| nested("params", e))?;
        let kin = self.kinetics.build().map_err(|e| nested("kinetics", e))?;
        let level = self.analysis.ellipse_level;
        if !(level > 0.0 && level < 1.0) {
            return Err(field_error("ellipse_level", format!("must lie in (0, 1), got {level}")));
        }
        if let Some(t) = self.analysis.qsd_time {
            if !(t > 0.0 && t <= self.horizon) {
                return Err(field_error("qsd_time", format!("must lie in (0, horizon], got {t}")));
            }
        }
        match self.scenario {
            Scenario::Ibm => {
                let mass = self
                    .mass
                    .as_ref()
                    .ok_or_else(|| field_error("mass", "the ibm scenario needs a [mass] section"))?;
                mass.build(&self.params, kin.clone()).map_err(|e| nested("mass", e))?;
                if let Some(x) = mass.initial_mass {
                    if !(x > 0.0 && x <= mass.max_mass.unwrap_or(f64::INFINITY)) {
                        return Err(field_error("initial_mass", format!("must lie in (0, max_mass], got {x}")));
                    }
                }
            }
            Scenario::Compare => {
                let cmp = self
                    .compare
                    .as_ref()
                    .ok_or_else(|| field_error("compare", "the compare scenario needs a [compare] section"))?;
                if cmp.sizes.is_empty() {
                    return Err(field_error("sizes", "needs at least one population size"));
                }
                for s in &cmp.sizes {
                    if !(s.volume > 0.0 && s.population >= 0.0 && s.substrate.is_none_or(|x| x >= 0.0)) {
                        return Err(field_error("sizes", format!("size `{}` needs volume > 0, population >= 0, substrate >= 0", s.label)));
                    }
                }
                let mut labels: Vec<&str> = cmp.sizes.iter().map(|s| s.label.as_str()).collect();
                labels.sort_unstable();
                if labels.windows(2).any(|w| w[0] == w[1]) {
                    return Err(field_error("sizes", "labels must be distinct"));
                }
            }
            _ => {}
        }
        if self.scenario != Scenario::Compare {
            self.init
                .resolve(&self.params, &kin)
                .map_err(|e| nested("init", e))?;
        }
        Ok(())
    }
}

/// `line N: message` from a TOML parse error span.
fn anchor_toml_error(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message().trim().to_string();
    match e.span() {
        Some(span) => format!("{}: {msg}", line_of(text, span.start)),
        None => msg,
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Prefix a validation message with the line where its key is set.
fn anchor_key(text: &str, msg: &str) -> String {
    let key = msg
        .strip_prefix('`')
        .and_then(|m| m.split('`').next())
        .unwrap_or("");
    let key = key.rsplit('.').next().unwrap_or(key);
    let line = text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key).is_some_and(|r| r.trim_start().starts_with('='))
            || l.trim_end() == format!("[{key}]")
    });
    match line {
        Some(i) if !key.is_empty() => format!("{}: {msg}", i + 1),
        _ => msg.to_string(),
    }
}
