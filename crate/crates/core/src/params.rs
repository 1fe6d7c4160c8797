use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of a chemostat run, shared by every model.
///
/// Units: `dilution` in 1/h, `s_in` in g/l, `volume` in l, `cell_mass` in g.
/// `stoichiometry` and `scale` are dimensionless. The jump models run with an
/// effective volume `scale * volume`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChemostatParams {
    pub dilution: f64,
    pub s_in: f64,
    pub stoichiometry: f64,
    pub volume: f64,
    pub cell_mass: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_scale() -> f64 {
    1.0
}

impl ChemostatParams {
    /// E. coli on glucose at 30 °C with the reference volume left to the caller.
    pub fn monod_reference(volume: f64) -> Self {
        Self {
            dilution: 0.5,
            s_in: 0.003,
            stoichiometry: 0.23,
            volume,
            cell_mass: 7e-13,
            scale: 1.0,
        }
    }

    /// Haldane experiments: same organism, richer feed.
    pub fn haldane_reference(volume: f64) -> Self {
        Self {
            s_in: 0.0978,
            ..Self::monod_reference(volume)
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("dilution", self.dilution),
            ("s_in", self.s_in),
            ("stoichiometry", self.stoichiometry),
            ("volume", self.volume),
            ("cell_mass", self.cell_mass),
            ("scale", self.scale),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "parameter `{name}` must be finite and > 0, got {v}"
                )));
            }
        }
        if self.scale < 1.0 {
            return Err(Error::Config(format!(
                "parameter `scale` must be >= 1, got {}",
                self.scale
            )));
        }
        Ok(())
    }

    /// Substrate consumed per unit of specific growth by one unit of the
    /// deterministic (scale-free) population: `k m / V`.
    #[inline]
    pub fn yield_factor(&self) -> f64 {
        self.stoichiometry * self.cell_mass / self.volume
    }

    /// Same as [`yield_factor`](Self::yield_factor) for one individual of the
    /// scaled jump model: `k m / (n V)`.
    #[inline]
    pub fn individual_yield(&self) -> f64 {
        self.yield_factor() / self.scale
    }

    /// Upper end of the invariant substrate interval `[0, max(S0, Sin)]`.
    #[inline]
    pub fn substrate_ceiling(&self, s0: f64) -> f64 {
        s0.max(self.s_in)
    }

    /// Deterministic population carried by the substrate gap `Sin - s`.
    #[inline]
    pub fn population_at(&self, s: f64) -> f64 {
        (self.s_in - s) / self.yield_factor()
    }
}
