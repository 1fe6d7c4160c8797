//! Closed-form long-time law of the limit system around a stable interior
//! equilibrium, and its Gaussian approximation for the scaled jump model.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::deterministic::{rows2, GaussianLaw2, GaussianLaw4};
use crate::error::{Error, Result};
use crate::kinetics::{Equilibrium, EquilibriumKind, Kinetics};
use crate::params::ChemostatParams;

/// Stationary law of `(N, S, Q, R)`: a point mass at the equilibrium for
/// `(N, S)` times a centred normal for `(Q, R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitLaw {
    pub equilibrium: Equilibrium,
    /// `Var Q`, individuals².
    pub alpha: f64,
    /// `Var R`, (g/l)².
    pub beta: f64,
    /// `Cov(Q, R) = −μ(S*)/μ'(S*) = −D/μ'(S*)`.
    pub cross: f64,
    /// `L = (k/V) m μ'(S*) N* = (Sin − S*) μ'(S*)`, 1/h.
    pub decay_rate: f64,
    pub sigma4: GaussianLaw4,
}

impl LimitLaw {
    /// `(Q, R)` block.
    pub fn fluctuation_cov(&self) -> Matrix2<f64> {
        Matrix2::new(self.alpha, self.cross, self.cross, self.beta)
    }

    pub fn correlation(&self) -> f64 {
        self.cross / (self.alpha * self.beta).sqrt()
    }
}

/// Stationary law for a stable interior equilibrium.
///
/// `α = [(L + 3D/2)² − 5D²/4] / [(k/V) m μ' (D + L)]`,
/// `β = (k/V) m D² / [μ' (D + L)]`. Both stay regular at `D = L`.
pub fn limit_law(p: &ChemostatParams, kin: &Kinetics, eq: &Equilibrium) -> Result<LimitLaw> {
    p.validate()?;
    match eq.kind {
        EquilibriumKind::Washout => {
            return Err(Error::Stability(
                "washout has no Gaussian limit law: the fluctuations degenerate".into(),
            ))
        }
        EquilibriumKind::UnstableInterior => {
            return Err(Error::Stability(format!(
                "equilibrium at S = {} is unstable: Σ_t explodes",
                eq.substrate
            )))
        }
        EquilibriumKind::StableInterior => {}
    }
    let d = p.dilution;
    let slope = kin.mu_prime(eq.substrate)?;
    if !(slope > 0.0) {
        return Err(Error::Stability(format!(
            "μ'(S*) = {slope} must be > 0 at a stable equilibrium"
        )));
    }
    let y = p.yield_factor();
    let l = y * slope * eq.population;
    let alpha = ((l + 1.5 * d).powi(2) - 1.25 * d * d) / (y * slope * (d + l));
    let beta = y * d * d / (slope * (d + l));
    let cross = -kin.mu(eq.substrate)? / slope;

    let mut cov = Matrix4::zeros();
    cov[(2, 2)] = alpha;
    cov[(2, 3)] = cross;
    cov[(3, 2)] = cross;
    cov[(3, 3)] = beta;
    let law = LimitLaw {
        equilibrium: *eq,
        alpha,
        beta,
        cross,
        decay_rate: l,
        sigma4: GaussianLaw4 {
            mean: Vector4::new(eq.population, eq.substrate, 0.0, 0.0),
            cov,
        },
    };
    if alpha * beta < cross * cross {
        return Err(Error::invariant(
            "covariance_psd",
            format!("αβ = {} < cross² = {}", alpha * beta, cross * cross),
        ));
    }
    Ok(law)
}

/// Normal approximation of `(N^n, S^n)` near equilibrium at scale `n`:
/// mean `(n N*, S*)`, covariance `[[n α, cross], [cross, β/n]]`.
pub fn discrete_gaussian_approx(law: &LimitLaw, n: f64) -> GaussianLaw2 {
    let e = &law.equilibrium;
    GaussianLaw2 {
        mean: Vector2::new(n * e.population, e.substrate),
        cov: Matrix2::new(n * law.alpha, law.cross, law.cross, law.beta / n),
    }
}

impl Serialize for LimitLaw {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LimitLaw", 7)?;
        st.serialize_field("equilibrium", &self.equilibrium)?;
        st.serialize_field("alpha", &self.alpha)?;
        st.serialize_field("beta", &self.beta)?;
        st.serialize_field("cross", &self.cross)?;
        st.serialize_field("decay_rate", &self.decay_rate)?;
        st.serialize_field("correlation", &self.correlation())?;
        st.serialize_field("fluctuation_cov", &rows2(&self.fluctuation_cov()))?;
        st.end()
    }
}
