use nalgebra::{Matrix2, Vector2};

use super::gaussian::GaussianLaw2;
use super::ode::{step_schedule, OdePath, OdeState2};
use crate::error::{Error, Result};
use crate::kinetics::Kinetics;
use crate::params::ChemostatParams;

/// Drift matrix `A` and noise vector `C` of the linear fluctuation equation
/// `dZ = A Z dt + C dB`, `Z = (Q, R)`, evaluated at a deterministic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrices {
    pub drift: Matrix2<f64>,
    pub noise: Vector2<f64>,
}

impl DriftMatrices {
    pub fn at(p: &ChemostatParams, kin: &Kinetics, st: OdeState2) -> Self {
        let s = st.substrate.max(0.0);
        let (mu, dmu) = (kin.rate(s), kin.rate_prime(s));
        let n = st.population;
        let y = p.yield_factor();
        let d = p.dilution;
        Self {
            drift: Matrix2::new(
                mu - d,
                dmu * n,
                -y * mu,
                -(d + y * dmu * n),
            ),
            noise: Vector2::new(((mu + d) * n).max(0.0).sqrt(), 0.0),
        }
    }
}

/// Gaussian laws of `(Q_t, R_t)` on the integration grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPath {
    pub times: Vec<f64>,
    pub laws: Vec<GaussianLaw2>,
}

impl MomentPath {
    pub fn last(&self) -> &GaussianLaw2 {
        self.laws.last().expect("moment path is never empty")
    }

    /// Law at a grid time (within `1e-9` relative).
    pub fn law_at(&self, t: f64) -> Option<&GaussianLaw2> {
        let tol = 1e-9 * t.abs().max(1.0);
        let i = self.times.partition_point(|&x| x < t - tol);
        (i < self.times.len() && (self.times[i] - t).abs() <= tol).then(|| &self.laws[i])
    }
}

/// Smallest eigenvalue allowed along an integration, relative to the trace.
pub const MOMENT_PSD_TOLERANCE: f64 = 1e-10;

/// RK4 on `dm = A_t m dt`, `dΣ = (A_t Σ + Σ A_tᵀ + C_t C_tᵀ) dt` for an
/// arbitrary time-dependent pair `(A_t, C_t)`.
pub fn integrate_linear_moments(
    coefficients: impl Fn(f64) -> Result<DriftMatrices>,
    init: GaussianLaw2,
    horizon: f64,
    dt: f64,
) -> Result<MomentPath> {
    if !(horizon > 0.0 && dt > 0.0) {
        return Err(Error::Config(format!(
            "moment integration needs horizon > 0 and dt > 0 (got {horizon}, {dt})"
        )));
    }
    let rhs = |t: f64, m: &Vector2<f64>, s: &Matrix2<f64>| -> Result<(Vector2<f64>, Matrix2<f64>)> {
        let DriftMatrices { drift: a, noise: c } = coefficients(t)?;
        Ok((a * m, a * s + s * a.transpose() + c * c.transpose()))
    };
    let mut times = vec![0.0];
    let mut laws = vec![init];
    let (mut m, mut s) = (init.mean, init.cov);
    for (t, h) in step_schedule(horizon, dt) {
        let (k1m, k1s) = rhs(t, &m, &s)?;
        let (k2m, k2s) = rhs(t + 0.5 * h, &(m + 0.5 * h * k1m), &(s + 0.5 * h * k1s))?;
        let (k3m, k3s) = rhs(t + 0.5 * h, &(m + 0.5 * h * k2m), &(s + 0.5 * h * k2s))?;
        let (k4m, k4s) = rhs(t + h, &(m + h * k3m), &(s + h * k3s))?;
        m += h / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
        s += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
        s = 0.5 * (s + s.transpose());
        let law = GaussianLaw2 { mean: m, cov: s };
        if !law.is_psd(MOMENT_PSD_TOLERANCE) {
            return Err(Error::invariant(
                "covariance_psd",
                format!("Σ lost positive semi-definiteness at t = {}", t + h),
            ));
        }
        times.push(t + h);
        laws.push(law);
    }
    Ok(MomentPath { times, laws })
}

/// Exact Gaussian law of `(Q_t, R_t)` given the deterministic path: the
/// coefficients are frozen along `ode_path`, which must cover the horizon.
pub fn integrate_fluctuation_moments(
    p: &ChemostatParams,
    kin: &Kinetics,
    ode_path: &OdePath,
    init: GaussianLaw2,
    horizon: f64,
    dt: f64,
) -> Result<MomentPath> {
    if ode_path.end_time() < horizon * (1.0 - 1e-12) {
        return Err(Error::Config(format!(
            "ODE path ends at {} before the horizon {horizon}",
            ode_path.end_time()
        )));
    }
    integrate_linear_moments(
        |t| {
            let st = ode_path.state_at(t).ok_or_else(|| {
                Error::Config(format!("ODE path does not cover t = {t}"))
            })?;
            Ok(DriftMatrices::at(p, kin, st))
        },
        init,
        horizon,
        dt,
    )
}
