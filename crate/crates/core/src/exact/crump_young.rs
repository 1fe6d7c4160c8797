use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{thinning_next_event, washout_substrate, SimOptions};
use crate::deterministic::enforce_substrate;
use crate::error::{Error, Result};
use crate::kinetics::Kinetics;
use crate::params::ChemostatParams;
use crate::rng::RngStream;
use crate::trajectory::{EventKind, EventRecord, Frame, ModelTag, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrumpYoungState {
    pub count: u64,
    pub substrate: f64,
}

impl CrumpYoungState {
    pub fn new(count: u64, substrate: f64) -> Self {
        Self { count, substrate }
    }
}

/// Substrate between jumps, population frozen at `count`.
struct Substrate<'a> {
    p: &'a ChemostatParams,
    kin: &'a Kinetics,
    consumption: f64,
    ceiling: f64,
    max_step: f64,
}

impl Substrate<'_> {
    /// RK4 over `span` with steps no longer than `max_step`. Takes and
    /// returns `μ(S)` at the current substrate so each stage evaluates the
    /// rate once.
    #[inline]
    fn advance(&self, s: f64, mu: f64, count: f64, span: f64) -> Result<(f64, f64)> {
        if span <= 0.0 {
            return Ok((s, mu));
        }
        let steps = if span <= self.max_step { 1 } else { (span / self.max_step).ceil() as usize };
        let h = span / steps as f64;
        let (d, s_in, c) = (self.p.dilution, self.p.s_in, self.consumption * count);
        let field = |s: f64, mu: f64| d * (s_in - s) - c * mu;
        let (mut s, mut mu) = (s, mu);
        for _ in 0..steps {
            let k1 = field(s, mu);
            let s2 = s + 0.5 * h * k1;
            let k2 = field(s2, self.kin.rate(s2.max(0.0)));
            let s3 = s + 0.5 * h * k2;
            let k3 = field(s3, self.kin.rate(s3.max(0.0)));
            let s4 = s + h * k3;
            let k4 = field(s4, self.kin.rate(s4.max(0.0)));
            s = enforce_substrate(s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), self.ceiling)?;
            mu = self.kin.rate(s);
        }
        Ok((s, mu))
    }
}

/// Exact sample of the Crump–Young process: births at rate `μ(S) N`, deaths
/// at rate `D N`, substrate `dS = [D(Sin − S) − (k m/(n V)) μ(S) N] dt`
/// between jumps. Absorbed at `N = 0`.
pub fn simulate_crump_young(
    p: &ChemostatParams,
    kin: &Kinetics,
    init: CrumpYoungState,
    horizon: f64,
    stream: RngStream,
    opts: &SimOptions,
) -> Result<Trajectory> {
    let started = Instant::now();
    p.validate()?;
    let grid = opts.grid(horizon)?;
    if !(init.substrate >= 0.0 && init.substrate.is_finite()) {
        return Err(Error::Config(format!(
            "initial substrate must be >= 0, got {}",
            init.substrate
        )));
    }
    let ceiling = p.substrate_ceiling(init.substrate);
    let mu_bar = kin.max_rate(ceiling)?;
    let sub = Substrate {
        p,
        kin,
        consumption: p.individual_yield(),
        ceiling,
        max_step: opts.ode_step,
    };
    let d = p.dilution;

    let mut rng = stream.rng();
    let mut traj = Trajectory::new(ModelTag::CrumpYoung, stream.stream);
    traj.frames.reserve(grid.len());
    let mut events = opts.record_events.then(Vec::new);

    let (mut t, mut n, mut s) = (0.0, init.count, init.substrate);
    let mut mu = kin.rate(s);
    traj.frames.push(Frame::new(0.0, n as f64, s));
    if n == 0 {
        traj.extinction_time = Some(0.0);
    }

    for j in 1..grid.len() {
        let t_frame = grid.time(j);
        while n > 0 {
            let count = n as f64;
            let bound = (mu_bar + d) * count;
            let (mut t_s, mut s_cur, mut mu_cur) = (t, s, mu);
            let event = thinning_next_event(t, bound, t_frame, &mut rng, |tc| {
                (s_cur, mu_cur) = sub.advance(s_cur, mu_cur, count, tc - t_s)?;
                t_s = tc;
                Ok((mu_cur + d) * count)
            })?;
            match event {
                Some(ev) => {
                    t = ev.time;
                    (s, mu) = (s_cur, mu_cur);
                    let kind = if ev.mark < mu * count {
                        n += 1;
                        traj.births += 1;
                        EventKind::Birth
                    } else {
                        n -= 1;
                        traj.deaths += 1;
                        EventKind::Death
                    };
                    if let Some(ev) = events.as_mut() {
                        ev.push(EventRecord { time: t, kind });
                    }
                    if n == 0 {
                        traj.extinction_time = Some(t);
                    }
                }
                None => {
                    (s, mu) = sub.advance(s_cur, mu_cur, count, t_frame - t_s)?;
                    t = t_frame;
                    break;
                }
            }
        }
        if n == 0 {
            let t0 = traj.extinction_time.unwrap_or(0.0);
            if t < t_frame {
                // Absorbed: substrate relaxes in closed form from S(T0).
                let s_t0 = s;
                traj.frames.push(Frame::new(
                    t_frame,
                    0.0,
                    washout_substrate(p.s_in, d, s_t0, t_frame - t0),
                ));
                for jj in j + 1..grid.len() {
                    let tf = grid.time(jj);
                    traj.frames
                        .push(Frame::new(tf, 0.0, washout_substrate(p.s_in, d, s_t0, tf - t0)));
                }
                break;
            }
        }
        traj.frames.push(Frame::new(t_frame, n as f64, s));
    }

    traj.events = events;
    traj.wall_time = started.elapsed().as_secs_f64();
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SimOptions {
        SimOptions::default().with_intervals(10)
    }

    #[test]
    fn frames_cover_the_grid_and_substrate_stays_bounded() {
        let p = ChemostatParams::monod_reference(1e-8);
        let k = Kinetics::monod_reference();
        let tr = simulate_crump_young(&p, &k, CrumpYoungState::new(5, 0.003), 50.0, RngStream::new(9, 1), &opts())
            .unwrap();
        assert_eq!(tr.frames.len(), 11);
        assert!(tr.is_ordered());
        assert_eq!(tr.frames.last().unwrap().time, 50.0);
        assert!(tr.frames.iter().all(|f| (0.0..=0.003).contains(&f.substrate)));
    }

    #[test]
    fn same_stream_is_bit_identical() {
        let p = ChemostatParams::monod_reference(1e-7);
        let k = Kinetics::monod_reference();
        let o = SimOptions { record_events: true, ..opts() };
        let a = simulate_crump_young(&p, &k, CrumpYoungState::new(50, 0.003), 20.0, RngStream::new(3, 7), &o).unwrap();
        let b = simulate_crump_young(&p, &k, CrumpYoungState::new(50, 0.003), 20.0, RngStream::new(3, 7), &o).unwrap();
        assert_eq!(a.frames, b.frames);
        assert_eq!(a.events, b.events);
        assert_eq!(a.event_count() as usize, a.events.as_ref().unwrap().len());
    }

    #[test]
    fn absorbed_path_relaxes_to_inflow() {
        let p = ChemostatParams::monod_reference(1e-6);
        let k = Kinetics::zero(p.s_in);
        let tr = simulate_crump_young(&p, &k, CrumpYoungState::new(3, 0.001), 60.0, RngStream::new(1, 0), &opts())
            .unwrap();
        let t0 = tr.extinction_time.expect("pure death dies out");
        assert_eq!(tr.births, 0);
        assert_eq!(tr.deaths, 3);
        let last = tr.last().unwrap();
        assert_eq!(last.count, 0.0);
        assert!((last.substrate - p.s_in).abs() <= p.s_in * (-0.5 * (60.0 - t0)).exp() + 1e-15);
    }

    #[test]
    fn empty_start_is_absorbed_immediately() {
        let p = ChemostatParams::monod_reference(1e-6);
        let k = Kinetics::monod_reference();
        let tr = simulate_crump_young(&p, &k, CrumpYoungState::new(0, 0.0), 10.0, RngStream::new(1, 0), &opts())
            .unwrap();
        assert_eq!(tr.extinction_time, Some(0.0));
        let exact = p.s_in * (1.0 - (-0.5f64 * 10.0).exp());
        assert!((tr.last().unwrap().substrate - exact).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_horizon() {
        let p = ChemostatParams::monod_reference(1e-6);
        let k = Kinetics::monod_reference();
        assert!(matches!(
            simulate_crump_young(&p, &k, CrumpYoungState::new(1, 0.003), 0.0, RngStream::new(1, 0), &opts()),
            Err(Error::Config(_))
        ));
    }
}
