//! Specific growth rates `μ(s)`, mass-structured growth/division laws and the
//! equilibria of the limiting chemostat ODE.

mod equilibrium;
mod interp;
mod mass;

pub use equilibrium::{find_equilibria, Equilibrium, EquilibriumKind, ROOT_SCAN_POINTS};
pub use interp::MonotoneCubic;
pub use mass::{DivisionKernel, DivisionRate, GrowthSpeed, MassKinetics};

use crate::error::{Error, Result};

/// Specific growth rate of the population as a function of substrate
/// concentration.
#[derive(Debug, Clone, PartialEq)]
pub enum Kinetics {
    /// `μmax s / (K + s)`.
    Monod { mu_max: f64, half_saturation: f64 },
    /// `μmax s / (K + s + s²/C)`: substrate inhibition past `s = √(KC)`.
    Haldane {
        mu_max: f64,
        half_saturation: f64,
        inhibition: f64,
    },
    /// Tabulated curve, interpolated with a monotone cubic.
    Custom(MonotoneCubic),
}

impl Kinetics {
    pub fn monod(mu_max: f64, half_saturation: f64) -> Result<Self> {
        check_positive("mu_max", mu_max)?;
        check_positive("half_saturation", half_saturation)?;
        Ok(Kinetics::Monod {
            mu_max,
            half_saturation,
        })
    }

    pub fn haldane(mu_max: f64, half_saturation: f64, inhibition: f64) -> Result<Self> {
        check_positive("mu_max", mu_max)?;
        check_positive("half_saturation", half_saturation)?;
        check_positive("inhibition", inhibition)?;
        Ok(Kinetics::Haldane {
            mu_max,
            half_saturation,
            inhibition,
        })
    }

    /// Sampled curve. The first knot must sit at `s = 0`; values must be
    /// nonnegative.
    pub fn custom(substrate: Vec<f64>, rate: Vec<f64>) -> Result<Self> {
        if substrate.first() != Some(&0.0) {
            return Err(Error::Config(
                "custom kinetics must start at substrate 0".into(),
            ));
        }
        if rate.iter().any(|&r| r < 0.0) {
            return Err(Error::Config("custom kinetics must be nonnegative".into()));
        }
        Ok(Kinetics::Custom(MonotoneCubic::new(substrate, rate)?))
    }

    /// The E. coli / glucose Monod law used throughout the examples.
    pub fn monod_reference() -> Self {
        Kinetics::Monod {
            mu_max: 1.35,
            half_saturation: 0.004,
        }
    }

    pub fn haldane_reference() -> Self {
        Kinetics::Haldane {
            mu_max: 1.35,
            half_saturation: 0.004,
            inhibition: 0.04,
        }
    }

    /// `μ ≡ 0` on `[0, s_max]`.
    pub fn zero(s_max: f64) -> Self {
        Self::constant(0.0, s_max)
    }

    /// `μ ≡ rate` on `[0, s_max]`. Note `μ(0) = rate`: only meaningful for
    /// birth–death checks where the substrate feedback is negligible.
    pub fn constant(rate: f64, s_max: f64) -> Self {
        Kinetics::Custom(
            MonotoneCubic::new(vec![0.0, s_max.max(f64::MIN_POSITIVE)], vec![rate, rate])
                .expect("two ordered finite knots"),
        )
    }

    /// `μ(s)`; negative or non-finite `s` is a domain error.
    pub fn mu(&self, s: f64) -> Result<f64> {
        check_substrate(s)?;
        Ok(self.rate(s))
    }

    /// `μ'(s)`; negative or non-finite `s` is a domain error.
    pub fn mu_prime(&self, s: f64) -> Result<f64> {
        check_substrate(s)?;
        Ok(self.rate_prime(s))
    }

    /// Unchecked `μ(s)` for inner loops whose substrate is known to be
    /// nonnegative.
    #[inline]
    pub fn rate(&self, s: f64) -> f64 {
        match *self {
            Kinetics::Monod {
                mu_max,
                half_saturation,
            } => mu_max * s / (half_saturation + s),
            Kinetics::Haldane {
                mu_max,
                half_saturation,
                inhibition,
            } => mu_max * s / (half_saturation + s + s * s / inhibition),
            Kinetics::Custom(ref c) => c.eval(s),
        }
    }

    #[inline]
    pub fn rate_prime(&self, s: f64) -> f64 {
        match *self {
            Kinetics::Monod {
                mu_max,
                half_saturation,
            } => {
                let d = half_saturation + s;
                mu_max * half_saturation / (d * d)
            }
            Kinetics::Haldane {
                mu_max,
                half_saturation,
                inhibition,
            } => {
                let d = half_saturation + s + s * s / inhibition;
                mu_max * (half_saturation - s * s / inhibition) / (d * d)
            }
            Kinetics::Custom(ref c) => c.derivative(s),
        }
    }

    /// `sup μ` over `[0, s_max]`, the thinning bound of the jump models.
    pub fn max_rate(&self, s_max: f64) -> Result<f64> {
        check_substrate(s_max)?;
        let m = match *self {
            Kinetics::Monod { .. } => self.rate(s_max),
            Kinetics::Haldane {
                half_saturation,
                inhibition,
                ..
            } => {
                let peak = (half_saturation * inhibition).sqrt();
                self.rate(peak.min(s_max))
            }
            Kinetics::Custom(ref c) => c.max_on(0.0, s_max),
        };
        if !m.is_finite() {
            return Err(Error::Kinetics(format!(
                "growth-rate bound on [0, {s_max}] is not finite"
            )));
        }
        Ok(m)
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("kinetics parameter `{name}` must be > 0, got {v}")))
    }
}

fn check_substrate(s: f64) -> Result<()> {
    if s.is_finite() && s >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("substrate must be finite and >= 0, got {s}")))
    }
}
