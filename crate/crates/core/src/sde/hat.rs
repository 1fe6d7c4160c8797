use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};

use super::{HatState, Schedule, SdeOptions};
use crate::deterministic::OdePath;
use crate::error::{Error, Result};
use crate::kinetics::Kinetics;
use crate::params::ChemostatParams;
use crate::rng::RngStream;
use crate::trajectory::{Frame, ModelTag, Trajectory};

/// Coefficients of the linearised system along a fixed ODE path, shared by
/// every replicate.
#[derive(Debug, Clone)]
pub struct HatPlan {
    schedule: Schedule,
    /// `[μ − D, μ' n N, √((μ + D) n N), S, k m μ/(V n), k m μ' N / V]` at the
    /// start of each step.
    coeffs: Vec<[f64; 6]>,
    dilution: f64,
    s_in: f64,
    noise_scale: f64,
}

impl HatPlan {
    /// `ode_path` is the scale-free chemostat ODE and must cover the horizon.
    pub fn new(
        p: &ChemostatParams,
        kin: &Kinetics,
        ode_path: &OdePath,
        horizon: f64,
        opts: &SdeOptions,
    ) -> Result<Self> {
        p.validate()?;
        let schedule = Schedule::new(horizon, opts)?;
        if ode_path.end_time() < horizon * (1.0 - 1e-12) {
            return Err(Error::Config(format!(
                "ODE path ends at {} before the horizon {horizon}",
                ode_path.end_time()
            )));
        }
        let n = p.scale;
        let y = p.yield_factor();
        let mut coeffs = Vec::with_capacity(schedule.steps.len());
        for &(t, _) in &schedule.steps {
            let st = ode_path
                .state_at(t)
                .ok_or_else(|| Error::Config(format!("ODE path does not cover t = {t}")))?;
            let s = st.substrate.max(0.0);
            let (mu, dmu) = (kin.rate(s), kin.rate_prime(s));
            let var = (mu + p.dilution) * n * st.population;
            if var < 0.0 {
                return Err(Error::invariant(
                    "diffusion_nonnegative",
                    format!("(μ + D) n N = {var} < 0 at t = {t}"),
                ));
            }
            coeffs.push([
                mu - p.dilution,
                dmu * n * st.population,
                var.sqrt(),
                st.substrate,
                y * mu / n,
                y * dmu * st.population,
            ]);
        }
        Ok(Self {
            schedule,
            coeffs,
            dilution: p.dilution,
            s_in: p.s_in,
            noise_scale: opts.noise_scale,
        })
    }

    /// One replicate. The population is never clipped; the substrate is
    /// held in `[0, max(S0, Sin)]`.
    pub fn sample(&self, init: HatState, stream: RngStream) -> Trajectory {
        let started = Instant::now();
        let mut rng = stream.rng();
        let mut traj = Trajectory::new(ModelTag::SdeHat, stream.stream);
        traj.frames.reserve(self.schedule.grid.len());
        let ceiling = init.substrate.max(self.s_in);
        let (mut n, mut s) = (init.population, init.substrate);
        traj.frames.push(Frame::new(0.0, n, s));
        let d = self.dilution;
        for (i, (&(_, h), c)) in self.schedule.steps.iter().zip(&self.coeffs).enumerate() {
            let xi: f64 = StandardNormal.sample(&mut rng);
            let dw = self.noise_scale * h.sqrt() * xi;
            let gap = s - c[3];
            let dn = (c[0] * n + c[1] * gap) * h + c[2] * dw;
            let ds = (d * (self.s_in - s) - c[4] * n - c[5] * gap) * h;
            n += dn;
            s = (s + ds).clamp(0.0, ceiling);
            if let Some(j) = self.schedule.frame_after(i) {
                traj.frames.push(Frame::new(self.schedule.grid.time(j), n, s));
            }
        }
        traj.wall_time = started.elapsed().as_secs_f64();
        traj
    }
}

/// Euler–Maruyama for the linearised approximation around the ODE path:
///
/// `dN̂ = [(μ − D) N̂ + μ'(Ŝ − S) n N] dt + √((μ + D) n N) dB`,
/// `dŜ = [D(Sin − Ŝ) − (k m/(V n)) μ N̂ − (k m/V) μ'(Ŝ − S) N] dt`,
///
/// with `μ`, `μ'` evaluated at the ODE substrate `S_t`.
pub fn integrate_hat(
    p: &ChemostatParams,
    kin: &Kinetics,
    ode_path: &OdePath,
    init: HatState,
    horizon: f64,
    stream: RngStream,
    opts: &SdeOptions,
) -> Result<Trajectory> {
    Ok(HatPlan::new(p, kin, ode_path, horizon, opts)?.sample(init, stream))
}
