use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinetics::Kinetics;
use crate::params::ChemostatParams;

/// State of the deterministic chemostat: population on the scale-free
/// (`n = 1`) scale and substrate concentration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeState2 {
    pub population: f64,
    pub substrate: f64,
}

impl OdeState2 {
    pub fn new(population: f64, substrate: f64) -> Self {
        Self {
            population,
            substrate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.population.is_finite() && self.population >= 0.0) {
            return Err(Error::Config(format!(
                "initial population must be >= 0, got {}",
                self.population
            )));
        }
        if !(self.substrate.is_finite() && self.substrate >= 0.0) {
            return Err(Error::Config(format!(
                "initial substrate must be >= 0, got {}",
                self.substrate
            )));
        }
        Ok(())
    }
}

/// `(dN/dt, dS/dt)` of the chemostat equations.
#[inline]
pub fn chemostat_field(p: &ChemostatParams, kin: &Kinetics, st: OdeState2) -> (f64, f64) {
    let mu = kin.rate(st.substrate.max(0.0));
    (
        (mu - p.dilution) * st.population,
        p.dilution * (p.s_in - st.substrate) - p.yield_factor() * mu * st.population,
    )
}

/// One classical Runge–Kutta step of the chemostat equations.
#[inline]
pub fn rk4_step(p: &ChemostatParams, kin: &Kinetics, st: OdeState2, dt: f64) -> OdeState2 {
    let shift = |s: OdeState2, k: (f64, f64), h: f64| {
        OdeState2::new(s.population + h * k.0, s.substrate + h * k.1)
    };
    let k1 = chemostat_field(p, kin, st);
    let k2 = chemostat_field(p, kin, shift(st, k1, 0.5 * dt));
    let k3 = chemostat_field(p, kin, shift(st, k2, 0.5 * dt));
    let k4 = chemostat_field(p, kin, shift(st, k3, dt));
    OdeState2::new(
        st.population + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        st.substrate + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Step sizes covering `[0, horizon]`: whole steps of `dt`, then the
/// remainder if it is not negligible.
pub fn step_schedule(horizon: f64, dt: f64) -> impl Iterator<Item = (f64, f64)> {
    let whole = (horizon / dt * (1.0 + 1e-12)).floor() as usize;
    let rest = horizon - whole as f64 * dt;
    let extra = usize::from(rest > 1e-9 * dt);
    (0..whole + extra).map(move |i| {
        let t0 = i as f64 * dt;
        let h = if i < whole { dt } else { rest };
        let h = if i + 1 == whole && extra == 0 { horizon - t0 } else { h };
        (t0, h)
    })
}

/// Bring a state back into `[0, ceiling]` after round-off, or fail if the
/// excursion is more than round-off.
#[inline]
pub(crate) fn enforce_substrate(s: f64, ceiling: f64) -> Result<f64> {
    let tol = 1e-9 * ceiling;
    if s < -tol || s > ceiling + tol || !s.is_finite() {
        return Err(Error::invariant(
            "substrate_bounds",
            format!("substrate {s} left [0, {ceiling}]"),
        ));
    }
    Ok(s.clamp(0.0, ceiling))
}

/// RK4 solution of the chemostat ODE sampled at every step, with slopes for
/// cubic Hermite interpolation in between.
#[derive(Debug, Clone, PartialEq)]
pub struct OdePath {
    pub times: Vec<f64>,
    pub states: Vec<OdeState2>,
    slopes: Vec<(f64, f64)>,
}

impl OdePath {
    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("path has at least the initial state")
    }

    pub fn last(&self) -> OdeState2 {
        *self.states.last().expect("path has at least the initial state")
    }

    /// State at a step time (within `1e-9` relative), without interpolation.
    pub fn node_at(&self, t: f64) -> Option<OdeState2> {
        let tol = 1e-9 * t.abs().max(1.0);
        let i = self.times.partition_point(|&x| x < t - tol);
        (i < self.times.len() && (self.times[i] - t).abs() <= tol).then(|| self.states[i])
    }

    /// State at `t` by cubic Hermite interpolation (fourth-order consistent
    /// with the RK4 nodes). `None` outside the covered interval.
    pub fn state_at(&self, t: f64) -> Option<OdeState2> {
        let end = self.end_time();
        let tol = 1e-9 * end.max(1.0);
        if t < -tol || t > end + tol {
            return None;
        }
        let t = t.clamp(0.0, end);
        let idx = self.times.partition_point(|&x| x <= t);
        if idx == 0 {
            return Some(self.states[0]);
        }
        let i = (idx - 1).min(self.times.len().saturating_sub(2));
        if self.times.len() == 1 {
            return Some(self.states[0]);
        }
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let u = (t - t0) / h;
        if u == 0.0 {
            return Some(self.states[i]);
        }
        if u == 1.0 {
            return Some(self.states[i + 1]);
        }
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let (a, b) = (self.states[i], self.states[i + 1]);
        let (da, db) = (self.slopes[i], self.slopes[i + 1]);
        Some(OdeState2::new(
            h00 * a.population + h10 * h * da.0 + h01 * b.population + h11 * h * db.0,
            h00 * a.substrate + h10 * h * da.1 + h01 * b.substrate + h11 * h * db.1,
        ))
    }
}

/// RK4 path of `dN = (μ(S) − D) N dt`, `dS = [D(Sin − S) − (k/V) m μ(S) N] dt`.
pub fn integrate_chemostat_ode(
    p: &ChemostatParams,
    kin: &Kinetics,
    init: OdeState2,
    horizon: f64,
    dt: f64,
) -> Result<OdePath> {
    p.validate()?;
    init.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!("horizon must be > 0, got {horizon}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("dt must be > 0, got {dt}")));
    }
    let ceiling = p.substrate_ceiling(init.substrate);
    let cap = (horizon / dt).ceil() as usize + 2;
    let mut times = Vec::with_capacity(cap);
    let mut states = Vec::with_capacity(cap);
    let mut slopes = Vec::with_capacity(cap);
    let mut st = init;
    times.push(0.0);
    states.push(st);
    slopes.push(chemostat_field(p, kin, st));
    for (t0, h) in step_schedule(horizon, dt) {
        st = rk4_step(p, kin, st, h);
        st.substrate = enforce_substrate(st.substrate, ceiling)?;
        st.population = st.population.max(0.0);
        times.push(t0 + h);
        states.push(st);
        slopes.push(chemostat_field(p, kin, st));
    }
    Ok(OdePath {
        times,
        states,
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::find_equilibria;

    fn monod() -> (ChemostatParams, Kinetics) {
        (ChemostatParams::monod_reference(1e-6), Kinetics::monod_reference())
    }

    #[test]
    fn schedule_lands_on_horizon() {
        let steps: Vec<_> = step_schedule(1.0, 0.3).collect();
        assert_eq!(steps.len(), 4);
        let end = steps.last().map(|(t, h)| t + h).unwrap();
        assert!((end - 1.0).abs() < 1e-15);
        let steps: Vec<_> = step_schedule(1.0, 1e-3).collect();
        assert_eq!(steps.len(), 1000);
        assert_eq!(steps.last().map(|(t, h)| t + h).unwrap(), 1.0);
    }

    #[test]
    fn equilibrium_is_fixed() {
        let (p, k) = monod();
        let e = find_equilibria(&k, &p).unwrap()[1];
        let path = integrate_chemostat_ode(&p, &k, OdeState2::new(e.population, e.substrate), 100.0, 1e-2).unwrap();
        let end = path.last();
        assert!((end.population - e.population).abs() <= 1e-9 * e.population);
        assert!((end.substrate - e.substrate).abs() <= 1e-9);
    }

    #[test]
    fn converges_to_interior_equilibrium() {
        let (p, k) = monod();
        let e = find_equilibria(&k, &p).unwrap()[1];
        let path = integrate_chemostat_ode(&p, &k, OdeState2::new(500.0, 0.003), 200.0, 1e-2).unwrap();
        let end = path.last();
        // Distance in relative population and absolute substrate.
        let dist = ((end.population - e.population) / e.population)
            .abs()
            .max((end.substrate - e.substrate).abs());
        assert!(dist < 1e-6, "distance {dist}");
    }

    #[test]
    fn conserved_combination_relaxes_exponentially() {
        let (p, k) = monod();
        let init = OdeState2::new(500.0, 0.003);
        let path = integrate_chemostat_ode(&p, &k, init, 30.0, 1e-3).unwrap();
        let c0 = init.substrate + p.yield_factor() * init.population - p.s_in;
        for (&t, st) in path.times.iter().zip(&path.states).step_by(997) {
            let c = st.substrate + p.yield_factor() * st.population - p.s_in;
            let exact = c0 * (-p.dilution * t).exp();
            assert!((c - exact).abs() <= 1e-8 * c0.abs(), "t={t}: {c} vs {exact}");
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let (p, k) = monod();
        let init = OdeState2::new(500.0, 0.003);
        let horizon = 20.0;
        let reference = integrate_chemostat_ode(&p, &k, init, horizon, 0.4 / 16.0).unwrap().last();
        let err = |dt: f64| {
            let e = integrate_chemostat_ode(&p, &k, init, horizon, dt).unwrap().last();
            ((e.population - reference.population) / reference.population)
                .abs()
                .max(((e.substrate - reference.substrate) / reference.substrate).abs())
        };
        let (coarse, fine) = (err(0.4), err(0.2));
        assert!(coarse / fine >= 12.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn interpolation_is_exact_at_nodes_and_accurate_between() {
        let (p, k) = monod();
        let init = OdeState2::new(500.0, 0.003);
        let coarse = integrate_chemostat_ode(&p, &k, init, 10.0, 0.1).unwrap();
        let fine = integrate_chemostat_ode(&p, &k, init, 10.0, 0.001).unwrap();
        assert_eq!(coarse.state_at(0.5).unwrap(), coarse.states[5]);
        for (&t, st) in fine.times.iter().zip(&fine.states).step_by(37) {
            let s = coarse.state_at(t).unwrap();
            assert!((s.population - st.population).abs() < 1e-6 * st.population);
        }
        assert!(coarse.state_at(10.5).is_none());
    }

    #[test]
    fn rejects_bad_config() {
        let (p, k) = monod();
        assert!(integrate_chemostat_ode(&p, &k, OdeState2::new(1.0, 0.003), 0.0, 0.1).is_err());
        assert!(integrate_chemostat_ode(&p, &k, OdeState2::new(1.0, 0.003), 1.0, -0.1).is_err());
        assert!(integrate_chemostat_ode(&p, &k, OdeState2::new(-1.0, 0.003), 1.0, 0.1).is_err());
    }
}
