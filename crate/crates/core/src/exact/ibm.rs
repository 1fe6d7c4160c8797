use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{next_candidate, washout_substrate, SimOptions};
use crate::deterministic::enforce_substrate;
use crate::error::{Error, Result};
use crate::fluctuations::PreparedTestFunction;
use crate::kinetics::{GrowthSpeed, MassKinetics};
use crate::params::ChemostatParams;
use crate::rng::RngStream;
use crate::trajectory::{EventKind, EventRecord, Frame, ModelTag, ProbeRecord, Trajectory};

/// Individual masses (g) and substrate concentration (g/l).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub masses: Vec<f64>,
    pub substrate: f64,
}

impl PopulationState {
    pub fn new(masses: Vec<f64>, substrate: f64) -> Self {
        Self { masses, substrate }
    }

    /// `count` individuals of identical mass.
    pub fn uniform(count: usize, mass: f64, substrate: f64) -> Self {
        Self::new(vec![mass; count], substrate)
    }
}

/// Running integrals for one probe.
#[derive(Debug, Clone, Copy, Default)]
struct ProbeAcc {
    /// Current integrands: drift, predicted division bracket, predicted
    /// withdrawal bracket.
    rates: [f64; 3],
    integrals: [f64; 3],
    realized_division: f64,
    realized_death: f64,
}

struct Ibm<'a> {
    p: &'a ChemostatParams,
    mk: &'a MassKinetics,
    scale: f64,
    /// `k / (n V)`.
    consumption: f64,
    ceiling: f64,
    max_step: f64,
    /// Stored masses are relative to `offset` when growth does not depend on
    /// mass: every individual then gains the same amount.
    masses: Vec<f64>,
    offset: f64,
    uniform: bool,
    s: f64,
    probes: Vec<PreparedTestFunction>,
    acc: Vec<ProbeAcc>,
    scratch: [Vec<f64>; 5],
}

impl Ibm<'_> {
    #[inline]
    fn mass(&self, i: usize) -> f64 {
        self.masses[i] + self.offset
    }

    fn count(&self) -> usize {
        self.masses.len()
    }

    fn fold_offset(&mut self) {
        if self.offset != 0.0 {
            let off = self.offset;
            self.masses.iter_mut().for_each(|m| *m += off);
            self.offset = 0.0;
        }
    }

    fn check_mass(&self, x: f64) -> Result<f64> {
        let m = self.mk.max_mass;
        let tol = if m.is_finite() { 1e-9 * m } else { 0.0 };
        if !(x >= -tol && x <= m + tol) {
            return Err(Error::invariant(
                "mass_bounds",
                format!("mass {x} left [0, {m}]"),
            ));
        }
        Ok(x.clamp(0.0, m))
    }

    /// `Σ g(S, x_i)` is `count · g(S)` for uniform growth.
    #[inline]
    fn uniform_speed(&self, s: f64) -> f64 {
        match self.mk.growth {
            GrowthSpeed::Zero => 0.0,
            _ => self.mk.growth_speed_with(self.mk.growth_rate.rate(s.max(0.0)), 0.0),
        }
    }

    fn step(&mut self, h: f64) -> Result<()> {
        let p = self.p;
        let d = p.dilution;
        if self.uniform {
            let n = self.count() as f64;
            let c = self.consumption * n;
            let f = |s: f64| -> (f64, f64) {
                let g = self.uniform_speed(s);
                (d * (p.s_in - s) - c * g, g)
            };
            let s = self.s;
            let k1 = f(s);
            let k2 = f(s + 0.5 * h * k1.0);
            let k3 = f(s + 0.5 * h * k2.0);
            let k4 = f(s + h * k3.0);
            self.s = enforce_substrate(
                s + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
                self.ceiling,
            )?;
            self.offset += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            return Ok(());
        }

        // Coupled RK4 on (S, x_1, ..., x_N).
        let mk = self.mk;
        let len = self.count();
        let [k1, k2, k3, k4, tmp] = &mut self.scratch;
        for v in [&mut *k1, &mut *k2, &mut *k3, &mut *k4, &mut *tmp] {
            v.resize(len, 0.0);
        }
        let eval = |s: f64, xs: &[f64], out: &mut [f64]| -> f64 {
            let mu = mk.growth_rate.rate(s.max(0.0));
            let mut total = 0.0;
            for (o, &x) in out.iter_mut().zip(xs) {
                let g = mk.growth_speed_with(mu, x);
                *o = g;
                total += g;
            }
            d * (p.s_in - s) - self.consumption * total
        };
        let s0 = self.s;
        let xs = &self.masses;
        let ks1 = eval(s0, xs, k1);
        tmp.iter_mut().zip(xs.iter().zip(k1.iter())).for_each(|(t, (x, k))| *t = x + 0.5 * h * k);
        let ks2 = eval(s0 + 0.5 * h * ks1, tmp, k2);
        tmp.iter_mut().zip(xs.iter().zip(k2.iter())).for_each(|(t, (x, k))| *t = x + 0.5 * h * k);
        let ks3 = eval(s0 + 0.5 * h * ks2, tmp, k3);
        tmp.iter_mut().zip(xs.iter().zip(k3.iter())).for_each(|(t, (x, k))| *t = x + h * k);
        let ks4 = eval(s0 + h * ks3, tmp, k4);
        self.s = enforce_substrate(s0 + h / 6.0 * (ks1 + 2.0 * ks2 + 2.0 * ks3 + ks4), self.ceiling)?;
        for i in 0..len {
            let x = self.masses[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            self.masses[i] = x;
        }
        for i in 0..len {
            self.masses[i] = self.check_mass(self.masses[i])?;
        }
        Ok(())
    }

    /// Probe integrands at the current state.
    fn refresh_probe_rates(&mut self) {
        if self.probes.is_empty() {
            return;
        }
        let d = self.p.dilution;
        let mu = self.mk.growth_rate.rate(self.s.max(0.0));
        let mut sums = vec![[0.0f64; 3]; self.probes.len()];
        for i in 0..self.count() {
            let x = self.mass(i);
            let b = self.mk.division_rate_with(mu, x);
            let g = self.mk.growth_speed_with(mu, x);
            for (sum, pr) in sums.iter_mut().zip(&self.probes) {
                let f = pr.eval(x);
                let (ej, ej2) = if b > 0.0 { pr.jump_moments(x) } else { (0.0, 0.0) };
                let df = if g != 0.0 { g * pr.derivative(x) } else { 0.0 };
                sum[0] += b * ej - d * f + df;
                sum[1] += b * ej2;
                sum[2] += d * f * f;
            }
        }
        for (acc, sum) in self.acc.iter_mut().zip(sums) {
            acc.rates = sum.map(|v| v / self.scale);
        }
    }

    /// Integrate from `from` to `to` without events, trapezoid on the probe
    /// integrands at every RK4 node.
    fn advance(&mut self, from: f64, to: f64) -> Result<()> {
        let span = to - from;
        if span <= 0.0 {
            return Ok(());
        }
        let steps = (span / self.max_step).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            self.step(h)?;
            if !self.probes.is_empty() {
                let before: Vec<[f64; 3]> = self.acc.iter().map(|a| a.rates).collect();
                self.refresh_probe_rates();
                for (acc, old) in self.acc.iter_mut().zip(before) {
                    for k in 0..3 {
                        acc.integrals[k] += 0.5 * h * (old[k] + acc.rates[k]);
                    }
                }
            }
        }
        Ok(())
    }

    fn probe_values(&self) -> Vec<f64> {
        self.probes
            .iter()
            .map(|pr| (0..self.count()).map(|i| pr.eval(self.mass(i))).sum::<f64>() / self.scale)
            .collect()
    }
}

/// Exact sample of the mass-structured model. Each individual divides at
/// rate `b(S, x)` into `αx`, `(1 − α)x` with `α ~ Q` and is withdrawn at rate
/// `D`; masses follow `dx = g(S, x) dt` and the substrate
/// `dS = [D(Sin − S) − k/(nV) Σ g(S, x_i)] dt` in between.
///
/// Thinning picks an individual uniformly at rate `(b̄ + D) N` and accepts
/// with probability `(b(S, x_i) + D) / (b̄ + D)`.
pub fn simulate_ibm(
    p: &ChemostatParams,
    mk: &MassKinetics,
    init: PopulationState,
    horizon: f64,
    stream: RngStream,
    opts: &SimOptions,
) -> Result<Trajectory> {
    let started = Instant::now();
    p.validate()?;
    mk.validate()?;
    let grid = opts.grid(horizon)?;
    if let Some(&x) = init
        .masses
        .iter()
        .find(|&&x| !(x >= 0.0 && x <= mk.max_mass && x.is_finite()))
    {
        return Err(Error::Domain(format!(
            "initial mass {x} outside [0, {}]",
            mk.max_mass
        )));
    }
    if !(init.substrate >= 0.0 && init.substrate.is_finite()) {
        return Err(Error::Config(format!(
            "initial substrate must be >= 0, got {}",
            init.substrate
        )));
    }
    let ceiling = p.substrate_ceiling(init.substrate);
    let b_bar = mk.division_bound(ceiling)?;
    let d = p.dilution;
    let unit_bound = b_bar + d;

    let probes: Vec<PreparedTestFunction> =
        opts.probes.iter().map(|f| f.prepare(mk.kernel)).collect();
    let mut sim = Ibm {
        p,
        mk,
        scale: p.scale,
        consumption: p.stoichiometry / (p.scale * p.volume),
        ceiling,
        max_step: opts.ode_step,
        masses: init.masses,
        offset: 0.0,
        uniform: matches!(mk.growth, GrowthSpeed::Zero | GrowthSpeed::Proportional { .. }),
        s: init.substrate,
        acc: vec![ProbeAcc::default(); probes.len()],
        probes,
        scratch: Default::default(),
    };
    sim.refresh_probe_rates();

    let mut rng = stream.rng();
    let mut traj = Trajectory::new(ModelTag::Ibm, stream.stream);
    let mut events = opts.record_events.then(Vec::new);
    let mut records: Vec<ProbeRecord> = (0..sim.probes.len())
        .map(|i| ProbeRecord {
            probe: i,
            ..Default::default()
        })
        .collect();
    let mut push_frame = |sim: &Ibm, traj: &mut Trajectory, t: f64| {
        traj.frames.push(Frame::new(t, sim.count() as f64, sim.s));
        for ((rec, acc), v) in records.iter_mut().zip(&sim.acc).zip(sim.probe_values()) {
            rec.value.push(v);
            rec.drift.push(acc.integrals[0]);
            rec.predicted_division.push(acc.integrals[1]);
            rec.predicted_death.push(acc.integrals[2]);
            rec.realized_division.push(acc.realized_division);
            rec.realized_death.push(acc.realized_death);
        }
    };

    let mut t = 0.0;
    push_frame(&sim, &mut traj, t);
    if sim.count() == 0 {
        traj.extinction_time = Some(0.0);
    }

    for j in 1..grid.len() {
        let t_frame = grid.time(j);
        while sim.count() > 0 {
            let n = sim.count();
            let Some(tc) = next_candidate(t, unit_bound * n as f64, t_frame, &mut rng) else {
                sim.advance(t, t_frame)?;
                t = t_frame;
                break;
            };
            sim.advance(t, tc)?;
            t = tc;
            let i = rng.random_range(0..n);
            let u = rng.random::<f64>() * unit_bound;
            let x = sim.mass(i);
            let b = mk.division_rate(sim.s, x);
            if b > b_bar * (1.0 + 1e-12) {
                return Err(Error::invariant(
                    "thinning_bound",
                    format!("division rate {b} exceeds bound {b_bar} at t = {t}"),
                ));
            }
            let kind = if u < b {
                let alpha = mk.kernel.sample(&mut rng);
                let (x1, x2) = (alpha * x, (1.0 - alpha) * x);
                for (pr, acc) in sim.probes.iter().zip(sim.acc.iter_mut()) {
                    let jump = pr.eval(x1) + pr.eval(x2) - pr.eval(x);
                    acc.realized_division += jump * jump / sim.scale;
                }
                sim.masses[i] = x1 - sim.offset;
                sim.masses.push(x2 - sim.offset);
                traj.births += 1;
                EventKind::Birth
            } else if u < b + d {
                for (pr, acc) in sim.probes.iter().zip(sim.acc.iter_mut()) {
                    acc.realized_death += pr.eval(x).powi(2) / sim.scale;
                }
                sim.masses.swap_remove(i);
                traj.deaths += 1;
                EventKind::Death
            } else {
                continue;
            };
            sim.refresh_probe_rates();
            if let Some(ev) = events.as_mut() {
                ev.push(EventRecord { time: t, kind });
            }
            if sim.count() == 0 {
                traj.extinction_time = Some(t);
            }
        }
        if sim.count() == 0 && t < t_frame {
            sim.s = washout_substrate(p.s_in, d, sim.s, t_frame - t);
            t = t_frame;
        }
        sim.fold_offset();
        push_frame(&sim, &mut traj, t_frame);
    }

    traj.events = events;
    traj.probes = records;
    traj.wall_time = started.elapsed().as_secs_f64();
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuations::TestFunction;
    use crate::kinetics::{DivisionKernel, DivisionRate, Kinetics};

    fn frozen(p: &ChemostatParams) -> MassKinetics {
        MassKinetics {
            growth_rate: Kinetics::monod_reference(),
            growth: GrowthSpeed::Zero,
            division: DivisionRate::Zero,
            kernel: DivisionKernel::Uniform,
            max_mass: 2.0 * p.cell_mass,
        }
    }

    #[test]
    fn frozen_masses_only_die() {
        let p = ChemostatParams::monod_reference(1e-6);
        let mk = frozen(&p);
        let masses: Vec<f64> = (1..=10).map(|i| i as f64 * 1e-13).collect();
        let opts = SimOptions { intervals: 20, ..Default::default() };
        let tr = simulate_ibm(&p, &mk, PopulationState::new(masses, 0.001), 40.0, RngStream::new(5, 0), &opts).unwrap();
        assert_eq!(tr.births, 0);
        assert!(tr.frames.windows(2).all(|w| w[1].count <= w[0].count));
        assert_eq!(tr.deaths as f64, 10.0 - tr.last().unwrap().count);
        // g ≡ 0: substrate relaxes exactly as with no consumption.
        let exact = washout_substrate(p.s_in, p.dilution, 0.001, 40.0);
        assert!((tr.last().unwrap().substrate - exact).abs() < 1e-12);
    }

    #[test]
    fn logistic_masses_stay_in_bounds() {
        let p = ChemostatParams::monod_reference(1e-7);
        let m_max = 2.0 * p.cell_mass;
        let mk = MassKinetics {
            growth_rate: Kinetics::monod_reference(),
            growth: GrowthSpeed::Logistic { factor: 1.4 },
            division: DivisionRate::MassDependent { factor: 2.0, exponent: 4.0 },
            kernel: DivisionKernel::SymmetricBeta { shape: 5.0 },
            max_mass: m_max,
        };
        let init = PopulationState::uniform(30, 0.7 * p.cell_mass, 0.003);
        let opts = SimOptions {
            intervals: 50,
            probes: vec![TestFunction::Linear],
            ..Default::default()
        };
        let tr = simulate_ibm(&p, &mk, init, 10.0, RngStream::new(2, 2), &opts).unwrap();
        assert!(tr.event_count() > 0);
        assert!(tr.frames.iter().all(|f| (0.0..=0.003).contains(&f.substrate)));
        // Linear probe: biomass ⟨ν, x⟩ never exceeds N·M.
        let rec = &tr.probes[0];
        for (f, v) in tr.frames.iter().zip(&rec.value) {
            assert!(*v >= 0.0 && *v <= f.count * m_max * (1.0 + 1e-12));
        }
        // Mass-conserving splits: no realised division bracket for f(x) = x.
        assert!(rec.realized_division.iter().all(|v| v.abs() < 1e-30));
    }

    #[test]
    fn rejects_mass_outside_range() {
        let p = ChemostatParams::monod_reference(1e-6);
        let mk = frozen(&p);
        let init = PopulationState::new(vec![1e-13, 5.0 * p.cell_mass], 0.003);
        let err = simulate_ibm(&p, &mk, init, 1.0, RngStream::new(1, 0), &SimOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn reproducible_with_events() {
        let p = ChemostatParams::monod_reference(1e-7);
        let mk = MassKinetics::crump_young(Kinetics::monod_reference(), p.cell_mass, DivisionKernel::Uniform);
        let opts = SimOptions { record_events: true, intervals: 10, probes: vec![TestFunction::Constant(1.0)], ..Default::default() };
        let run = || simulate_ibm(&p, &mk, PopulationState::uniform(40, p.cell_mass, 0.003), 5.0, RngStream::new(8, 3), &opts).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a.frames, b.frames);
        assert_eq!(a.probes, b.probes);
        assert_eq!(a.events.as_ref().unwrap().len() as u64, a.event_count());
        // f ≡ 1 tracks the count divided by n.
        for (f, v) in a.frames.iter().zip(&a.probes[0].value) {
            assert_eq!(*v, f.count);
        }
    }
}
