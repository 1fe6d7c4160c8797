//! Deterministic limits: the chemostat ODE and the exact Gaussian law of the
//! linear fluctuation equation around it.

mod gaussian;
mod lyapunov;
mod moments;
mod ode;

pub use gaussian::{GaussianLaw2, GaussianLaw4, PSD_TOLERANCE};
pub(crate) use gaussian::rows2;
pub use lyapunov::{is_hurwitz, lyapunov_residual, lyapunov_stationary_cov, StationaryCov};
pub use moments::{
    integrate_fluctuation_moments, integrate_linear_moments, DriftMatrices, MomentPath,
    MOMENT_PSD_TOLERANCE,
};
pub use ode::{
    chemostat_field, integrate_chemostat_ode, rk4_step, step_schedule, OdePath, OdeState2,
};
pub(crate) use ode::enforce_substrate;
