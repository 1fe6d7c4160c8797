use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Schedule, SdeOptions};
use crate::deterministic::{integrate_chemostat_ode, DriftMatrices, OdePath, OdeState2};
use crate::error::{Error, Result};
use crate::kinetics::Kinetics;
use crate::params::ChemostatParams;
use crate::rng::RngStream;
use crate::trajectory::{Frame, ModelTag, Trajectory};

/// `(N, S, Q, R)`: deterministic population and substrate with their
/// fluctuations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeState4 {
    pub population: f64,
    pub substrate: f64,
    pub q: f64,
    pub r: f64,
}

impl SdeState4 {
    pub fn new(population: f64, substrate: f64, q: f64, r: f64) -> Self {
        Self {
            population,
            substrate,
            q,
            r,
        }
    }
}

/// The `(N, S)` part of the limit system is deterministic, so its path and
/// the coefficients `A_t`, `C_t` are computed once and shared by every
/// replicate.
#[derive(Debug, Clone)]
pub struct CyedsPlan {
    schedule: Schedule,
    ode: OdePath,
    /// `[a11, a12, a21, a22, c1]` at the start of each step.
    coeffs: Vec<[f64; 5]>,
    noise_scale: f64,
}

impl CyedsPlan {
    pub fn new(
        p: &ChemostatParams,
        kin: &Kinetics,
        init: OdeState2,
        horizon: f64,
        opts: &SdeOptions,
    ) -> Result<Self> {
        let schedule = Schedule::new(horizon, opts)?;
        let ode = integrate_chemostat_ode(p, kin, init, horizon, opts.dt)?;
        let mut coeffs = Vec::with_capacity(schedule.steps.len());
        for st in &ode.states[..schedule.steps.len()] {
            let mu = kin.rate(st.substrate);
            if (mu + p.dilution) * st.population < 0.0 {
                return Err(Error::invariant(
                    "diffusion_nonnegative",
                    format!("(μ + D) N < 0 at N = {}", st.population),
                ));
            }
            let DriftMatrices { drift: a, noise: c } = DriftMatrices::at(p, kin, *st);
            coeffs.push([a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)], c[0]]);
        }
        Ok(Self {
            schedule,
            ode,
            coeffs,
            noise_scale: opts.noise_scale,
        })
    }

    pub fn ode(&self) -> &OdePath {
        &self.ode
    }

    /// One replicate started from `(Q0, R0)`.
    pub fn sample(&self, q0: f64, r0: f64, stream: RngStream) -> Trajectory {
        let started = Instant::now();
        let mut rng = stream.rng();
        let mut traj = Trajectory::new(ModelTag::SdeCyeds, stream.stream);
        traj.frames.reserve(self.schedule.grid.len());
        let frame = |i: usize, t: f64, q: f64, r: f64| {
            let st = self.ode.states[i];
            Frame {
                time: t,
                count: st.population,
                substrate: st.substrate,
                q: Some(q),
                r: Some(r),
            }
        };
        let (mut q, mut r) = (q0, r0);
        traj.frames.push(frame(0, 0.0, q, r));
        for (i, (&(_, h), c)) in self.schedule.steps.iter().zip(&self.coeffs).enumerate() {
            let xi: f64 = StandardNormal.sample(&mut rng);
            let dw = self.noise_scale * h.sqrt() * xi;
            let (dq, dr) = ((c[0] * q + c[1] * r) * h + c[4] * dw, (c[2] * q + c[3] * r) * h);
            q += dq;
            r += dr;
            if let Some(j) = self.schedule.frame_after(i) {
                traj.frames.push(frame(i + 1, self.schedule.grid.time(j), q, r));
            }
        }
        traj.wall_time = started.elapsed().as_secs_f64();
        traj
    }
}

/// Euler–Maruyama for the limit system: `(N, S)` by the same RK4 steps as
/// [`integrate_chemostat_ode`], `(Q, R)` by Euler–Maruyama with one Gaussian
/// increment per step.
pub fn integrate_cyeds(
    p: &ChemostatParams,
    kin: &Kinetics,
    init: SdeState4,
    horizon: f64,
    stream: RngStream,
    opts: &SdeOptions,
) -> Result<Trajectory> {
    let plan = CyedsPlan::new(
        p,
        kin,
        OdeState2::new(init.population, init.substrate),
        horizon,
        opts,
    )?;
    Ok(plan.sample(init.q, init.r, stream))
}
