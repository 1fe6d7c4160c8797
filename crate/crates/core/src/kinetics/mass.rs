use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use statrs::function::beta::ln_beta;

use super::Kinetics;
use crate::error::{Error, Result};

/// Individual growth speed `g(s, x)`, g/h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthSpeed {
    Zero,
    /// `g(s, x) = μ(s) m`: every individual gains mass at the same rate.
    /// Needs an unbounded maximal mass.
    Proportional { cell_mass: f64 },
    /// `g(s, x) = c μ(s) x (1 − x/M)`, vanishing at both ends of `[0, M]`.
    Logistic { factor: f64 },
}

/// Division rate `b(s, x)`, 1/h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivisionRate {
    Zero,
    /// `b(s, x) = c μ(s)`.
    Proportional { factor: f64 },
    /// `b(s, x) = c μ(s) (x/M)^p`.
    MassDependent { factor: f64, exponent: f64 },
}

/// Law `Q(dα)` of the mass fraction kept by the first daughter. Every variant
/// is symmetric under `α ↦ 1 − α`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DivisionKernel {
    #[default]
    Uniform,
    Half,
    /// `Beta(a, a)` with `a >= 1`.
    SymmetricBeta { shape: f64 },
}

impl DivisionKernel {
    pub fn validate(&self) -> Result<()> {
        if let DivisionKernel::SymmetricBeta { shape } = *self {
            if !(shape.is_finite() && shape >= 1.0) {
                return Err(Error::Config(format!(
                    "symmetric Beta division kernel needs shape >= 1, got {shape}"
                )));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DivisionKernel::Uniform => rng.random::<f64>(),
            DivisionKernel::Half => 0.5,
            DivisionKernel::SymmetricBeta { shape } => {
                let a = Beta::new(shape, shape)
                    .expect("validated shape")
                    .sample(rng);
                // Coin flip makes the law exactly symmetric whatever the sampler does.
                if rng.random::<bool>() {
                    a
                } else {
                    1.0 - a
                }
            }
        }
    }

    /// `E[α^p (1 − α)^q]`.
    pub fn moment(&self, p: u32, q: u32) -> f64 {
        match *self {
            DivisionKernel::Half => 0.5f64.powi((p + q) as i32),
            DivisionKernel::Uniform => beta_ratio(1.0, p, q),
            DivisionKernel::SymmetricBeta { shape } => beta_ratio(shape, p, q),
        }
    }

    /// `E[h(α)]` by 64-point Gauss–Legendre against the kernel density.
    pub fn expect(&self, h: impl Fn(f64) -> f64) -> f64 {
        match *self {
            DivisionKernel::Half => h(0.5),
            DivisionKernel::Uniform => gauss_legendre_unit()
                .iter()
                .map(|&(x, w)| w * h(x))
                .sum(),
            DivisionKernel::SymmetricBeta { shape } => {
                let norm = ln_beta(shape, shape);
                gauss_legendre_unit()
                    .iter()
                    .map(|&(x, w)| {
                        let dens = ((shape - 1.0) * (x.ln() + (1.0 - x).ln()) - norm).exp();
                        w * dens * h(x)
                    })
                    .sum()
            }
        }
    }
}

fn beta_ratio(a: f64, p: u32, q: u32) -> f64 {
    (ln_beta(a + p as f64, a + q as f64) - ln_beta(a, a)).exp()
}

/// Nodes and weights of the 64-point Gauss–Legendre rule mapped to `[0, 1]`.
fn gauss_legendre_unit() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 64;
        let mut rule = Vec::with_capacity(N);
        for i in 0..N {
            // Chebyshev initial guess, then Newton on P_N.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=N {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            rule.push(((1.0 - x) / 2.0, w / 2.0));
        }
        rule
    })
}

/// Growth, division and splitting laws of the mass-structured model.
#[derive(Debug, Clone, PartialEq)]
pub struct MassKinetics {
    pub growth_rate: Kinetics,
    pub growth: GrowthSpeed,
    pub division: DivisionRate,
    pub kernel: DivisionKernel,
    /// Maximal mass `M`, g. `f64::INFINITY` for the Crump–Young reduction.
    pub max_mass: f64,
}

impl MassKinetics {
    /// `g = μ m`, `b = μ`, `M = ∞`: the count process is the Crump–Young
    /// birth–death process.
    pub fn crump_young(kin: Kinetics, cell_mass: f64, kernel: DivisionKernel) -> Self {
        Self {
            growth_rate: kin,
            growth: GrowthSpeed::Proportional { cell_mass },
            division: DivisionRate::Proportional { factor: 1.0 },
            kernel,
            max_mass: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        let bounded = self.max_mass.is_finite();
        if !(self.max_mass > 0.0) {
            return Err(Error::Config(format!(
                "maximal mass must be > 0, got {}",
                self.max_mass
            )));
        }
        match self.growth {
            GrowthSpeed::Proportional { cell_mass } if bounded || !(cell_mass > 0.0) => {
                return Err(Error::Config(
                    "proportional growth needs cell_mass > 0 and an unbounded maximal mass".into(),
                ))
            }
            GrowthSpeed::Logistic { factor } if !bounded || !(factor >= 0.0) => {
                return Err(Error::Config(
                    "logistic growth needs factor >= 0 and a finite maximal mass".into(),
                ))
            }
            _ => {}
        }
        match self.division {
            DivisionRate::Proportional { factor } if !(factor >= 0.0 && factor.is_finite()) => {
                return Err(Error::Config("division factor must be >= 0".into()))
            }
            DivisionRate::MassDependent { factor, exponent }
                if !bounded || !(factor >= 0.0 && factor.is_finite()) || !(exponent >= 0.0) =>
            {
                return Err(Error::Config(
                    "mass-dependent division needs factor, exponent >= 0 and a finite maximal mass"
                        .into(),
                ))
            }
            _ => {}
        }
        Ok(())
    }

    #[inline]
    pub fn growth_speed(&self, s: f64, x: f64) -> f64 {
        match self.growth {
            GrowthSpeed::Zero => 0.0,
            GrowthSpeed::Proportional { cell_mass } => self.growth_rate.rate(s) * cell_mass,
            GrowthSpeed::Logistic { factor } => {
                factor * self.growth_rate.rate(s) * x * (1.0 - x / self.max_mass)
            }
        }
    }

    /// `g(s, x)` with `μ(s)` already evaluated.
    #[inline]
    pub(crate) fn growth_speed_with(&self, mu: f64, x: f64) -> f64 {
        match self.growth {
            GrowthSpeed::Zero => 0.0,
            GrowthSpeed::Proportional { cell_mass } => mu * cell_mass,
            GrowthSpeed::Logistic { factor } => factor * mu * x * (1.0 - x / self.max_mass),
        }
    }

    #[inline]
    pub fn division_rate(&self, s: f64, x: f64) -> f64 {
        self.division_rate_with(self.growth_rate.rate(s), x)
    }

    #[inline]
    pub(crate) fn division_rate_with(&self, mu: f64, x: f64) -> f64 {
        match self.division {
            DivisionRate::Zero => 0.0,
            DivisionRate::Proportional { factor } => factor * mu,
            DivisionRate::MassDependent { factor, exponent } => {
                factor * mu * (x / self.max_mass).clamp(0.0, 1.0).powf(exponent)
            }
        }
    }

    /// `b̄ = sup b` over `[0, s_max] × [0, M]`.
    pub fn division_bound(&self, s_max: f64) -> Result<f64> {
        let mu_bar = self.growth_rate.max_rate(s_max)?;
        Ok(match self.division {
            DivisionRate::Zero => 0.0,
            DivisionRate::Proportional { factor } => factor * mu_bar,
            DivisionRate::MassDependent { factor, .. } => factor * mu_bar,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    #[test]
    fn kernels_are_symmetric() {
        // Two-sample KS critical value at the 1% level for n = m = 1e4.
        let crit = 1.628 * (2.0f64 / 10_000.0).sqrt();
        for kernel in [
            DivisionKernel::Uniform,
            DivisionKernel::SymmetricBeta { shape: 2.5 },
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let a: Vec<f64> = (0..10_000).map(|_| kernel.sample(&mut rng)).collect();
            let b: Vec<f64> = (0..10_000).map(|_| 1.0 - kernel.sample(&mut rng)).collect();
            let d = ks_two_sample(a, b);
            assert!(d < crit, "{kernel:?}: KS {d} >= {crit}");
        }
        assert_eq!(DivisionKernel::Half.sample(&mut ChaCha8Rng::seed_from_u64(0)), 0.5);
    }

    #[test]
    fn moments_match_quadrature() {
        for kernel in [
            DivisionKernel::Uniform,
            DivisionKernel::Half,
            DivisionKernel::SymmetricBeta { shape: 3.0 },
        ] {
            for (p, q) in [(0, 0), (1, 0), (2, 0), (1, 1), (3, 2)] {
                let quad = kernel.expect(|a| a.powi(p as i32) * (1.0 - a).powi(q as i32));
                assert!((kernel.moment(p, q) - quad).abs() < 1e-12, "{kernel:?} {p} {q}");
            }
        }
        // Uniform: E[α²] = 1/3.
        assert!((DivisionKernel::Uniform.moment(2, 0) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn validation_requires_matching_mass_bound() {
        let mut mk = MassKinetics::crump_young(Kinetics::monod_reference(), 7e-13, DivisionKernel::Uniform);
        assert!(mk.validate().is_ok());
        mk.max_mass = 1e-12;
        assert!(mk.validate().is_err());
        let mk = MassKinetics {
            growth: GrowthSpeed::Logistic { factor: 1.0 },
            division: DivisionRate::MassDependent { factor: 2.0, exponent: 2.0 },
            max_mass: 2e-12,
            ..MassKinetics::crump_young(Kinetics::monod_reference(), 7e-13, DivisionKernel::Uniform)
        };
        assert!(mk.validate().is_ok());
        assert_eq!(mk.growth_speed(0.001, 0.0), 0.0);
        assert_eq!(mk.growth_speed(0.001, 2e-12), 0.0);
        assert_eq!(mk.growth_speed(0.0, 1e-12), 0.0);
        assert!(DivisionKernel::SymmetricBeta { shape: 0.5 }.validate().is_err());
    }
}
