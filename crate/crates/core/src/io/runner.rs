use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::analysis::{analyse, Table};
use super::config::{CompareSde, InitialState, RunConfig, Scenario};
use crate::deterministic::{integrate_chemostat_ode, OdeState2};
use crate::error::{Error, Result};
use crate::exact::{simulate_crump_young, simulate_ibm, CrumpYoungState, PopulationState, SimOptions};
use crate::fluctuations::TestFunction;
use crate::kinetics::Kinetics;
use crate::params::ChemostatParams;
use crate::rng::RngStream;
use crate::sde::{integrate_feller, CyedsPlan, DiffusionState, HatPlan, SdeOptions};
use crate::trajectory::{Frame, ModelTag, OutputGrid, Trajectory};

/// One model run over all replicates at one population size.
#[derive(Debug, Clone)]
pub struct Batch {
    pub label: String,
    pub model: ModelTag,
    pub params: ChemostatParams,
    pub init: InitialState,
    pub trajectories: Vec<Trajectory>,
    /// Elapsed seconds for the whole ensemble.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingEntry {
    pub label: String,
    pub model: ModelTag,
    pub replicates: usize,
    pub events: u64,
    pub wall_time_s: f64,
    /// Sum of per-replicate times; equals the wall time on one thread.
    pub replicate_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub threads: usize,
    pub entries: Vec<TimingEntry>,
    pub total_wall_time_s: f64,
    pub total_replicate_time_s: f64,
    pub total_events: u64,
    pub total_replicates: usize,
}

impl TimingReport {
    pub fn new(threads: usize, entries: Vec<TimingEntry>) -> Self {
        Self {
            threads,
            total_wall_time_s: entries.iter().map(|e| e.wall_time_s).sum(),
            total_replicate_time_s: entries.iter().map(|e| e.replicate_time_s).sum(),
            total_events: entries.iter().map(|e| e.events).sum(),
            total_replicates: entries.iter().map(|e| e.replicates).sum(),
            entries,
        }
    }

    pub fn entry(&self, label: &str, model: ModelTag) -> Option<&TimingEntry> {
        self.entries.iter().find(|e| e.label == label && e.model == model)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub batches: Vec<Batch>,
    /// Deterministic JSON summary (no timings).
    pub summary: serde_json::Value,
    pub tables: Vec<Table>,
    pub timing: TimingReport,
}

/// Largest step `<= dt` that divides the output spacing.
pub fn aligned_step(horizon: f64, intervals: usize, dt: f64) -> f64 {
    let spacing = horizon / intervals as f64;
    spacing / (spacing / dt * (1.0 - 1e-12)).ceil()
}

fn whole_count(population: f64) -> Result<u64> {
    if population.fract() != 0.0 || population < 0.0 {
        return Err(Error::Config(format!(
            "`population`: jump models need a whole number of individuals, got {population}"
        )));
    }
    Ok(population as u64)
}

/// Execute a validated configuration. Replicate `i` draws from
/// `RngStream::new(seed, i)` whatever the thread count.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let kin = config.kinetics.build()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("`threads`: {e}")))?;

    let mut jobs = Vec::new();
    match config.scenario {
        Scenario::Compare => {
            let cmp = config.compare.as_ref().expect("validated");
            let sde = cmp.sde.iter().map(|s| match s {
                CompareSde::Hat => ModelTag::SdeHat,
                CompareSde::Feller => ModelTag::SdeFeller,
            });
            let models: Vec<ModelTag> = std::iter::once(ModelTag::CrumpYoung).chain(sde).collect();
            for size in &cmp.sizes {
                let params = ChemostatParams { volume: size.volume, ..config.params };
                let init = InitialState {
                    population: size.population,
                    substrate: size.substrate.or(config.init.substrate).unwrap_or(params.s_in),
                };
                for &model in &models {
                    jobs.push((size.label.clone(), model, params, init));
                }
            }
        }
        s => {
            let model = match s {
                Scenario::Ibm => ModelTag::Ibm,
                Scenario::CrumpYoung => ModelTag::CrumpYoung,
                Scenario::Ode => ModelTag::Ode,
                Scenario::SdeCyeds => ModelTag::SdeCyeds,
                Scenario::SdeHat => ModelTag::SdeHat,
                Scenario::SdeFeller => ModelTag::SdeFeller,
                Scenario::Compare => unreachable!(),
            };
            let init = config.init.resolve(&config.params, &kin)?;
            jobs.push((model.as_str().to_string(), model, config.params, init));
        }
    }

    let mut batches = Vec::with_capacity(jobs.len());
    for (label, model, params, init) in jobs {
        log::info!("running {model} ({label}): {} replicates", config.replicates);
        let batch = pool.install(|| run_batch(config, &kin, label, model, params, init))?;
        batches.push(batch);
    }

    let mut reports = Vec::with_capacity(batches.len());
    let mut tables = Vec::new();
    for batch in &mut batches {
        let (report, mut t) = analyse(config, &kin, batch)?;
        reports.push(report);
        tables.append(&mut t);
    }
    let timing = TimingReport::new(
        pool.current_num_threads(),
        batches
            .iter()
            .map(|b| TimingEntry {
                label: b.label.clone(),
                model: b.model,
                replicates: b.trajectories.len(),
                events: b.trajectories.iter().map(|t| t.event_count()).sum(),
                wall_time_s: b.wall_time,
                replicate_time_s: b.trajectories.iter().map(|t| t.wall_time).sum(),
            })
            .collect(),
    );
    let summary = serde_json::json!({
        "schema": super::SUMMARY_SCHEMA,
        "scenario": config.scenario,
        "seed": {
            "master": config.seed,
            "scheme": "replicate i uses ChaCha8 seeded with splitmix64(master, i)",
            "replicates": config.replicates,
        },
        "horizon": config.horizon,
        "units": super::units(),
        "batches": reports,
    });
    Ok(RunOutput {
        config: config.clone(),
        batches,
        summary,
        tables,
        timing,
    })
}

fn ensemble(
    reps: usize,
    seed: u64,
    f: impl Fn(RngStream) -> Result<Trajectory> + Sync,
) -> Result<Vec<Trajectory>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|i| f(RngStream::new(seed, i)))
        .collect()
}

fn run_batch(
    config: &RunConfig,
    kin: &Kinetics,
    label: String,
    model: ModelTag,
    p: ChemostatParams,
    init: InitialState,
) -> Result<Batch> {
    let started = Instant::now();
    let (horizon, reps, seed) = (config.horizon, config.replicates, config.seed);
    let n = p.scale;
    let det = OdeState2::new(init.population / n, init.substrate);
    let sim_opts = SimOptions {
        intervals: config.intervals,
        ode_step: config.ode_dt,
        ..Default::default()
    };
    let sde_opts = SdeOptions {
        dt: config.dt,
        intervals: config.intervals,
        noise_scale: 1.0,
    };
    let trajectories = match model {
        ModelTag::CrumpYoung => {
            let st = CrumpYoungState::new(whole_count(init.population)?, init.substrate);
            ensemble(reps, seed, |s| simulate_crump_young(&p, kin, st, horizon, s, &sim_opts))?
        }
        ModelTag::Ibm => {
            let mass = config.mass.as_ref().expect("validated");
            let mk = mass.build(&p, kin.clone())?;
            let opts = SimOptions {
                probes: if config.analysis.qv {
                    vec![TestFunction::Constant(1.0), TestFunction::Linear]
                } else {
                    Vec::new()
                },
                ..sim_opts
            };
            let start = PopulationState::uniform(
                whole_count(init.population)? as usize,
                mass.initial_mass.unwrap_or(p.cell_mass),
                init.substrate,
            );
            ensemble(reps, seed, |s| simulate_ibm(&p, &mk, start.clone(), horizon, s, &opts))?
        }
        ModelTag::Ode => {
            let dt = aligned_step(horizon, config.intervals, config.dt);
            let path = integrate_chemostat_ode(&p, kin, det, horizon, dt)?;
            let grid = OutputGrid::new(horizon, config.intervals);
            let mut tr = Trajectory::new(ModelTag::Ode, 0);
            for t in grid.times() {
                let st = path
                    .node_at(t)
                    .ok_or_else(|| Error::Alignment(format!("ODE has no node at t = {t}")))?;
                tr.frames.push(Frame::new(t, n * st.population, st.substrate));
            }
            vec![tr]
        }
        ModelTag::SdeCyeds => {
            let plan = CyedsPlan::new(&p, kin, det, horizon, &sde_opts)?;
            let mut out = ensemble(reps, seed, |s| Ok(plan.sample(0.0, 0.0, s)))?;
            // Report the population in individuals like every other model.
            for f in out.iter_mut().flat_map(|t| t.frames.iter_mut()) {
                f.count *= n;
            }
            out
        }
        ModelTag::SdeHat => {
            let ode = integrate_chemostat_ode(&p, kin, det, horizon, config.dt)?;
            let plan = HatPlan::new(&p, kin, &ode, horizon, &sde_opts)?;
            let st = DiffusionState::new(init.population, init.substrate);
            ensemble(reps, seed, |s| Ok(plan.sample(st, s)))?
        }
        ModelTag::SdeFeller => {
            let st = DiffusionState::new(init.population, init.substrate);
            ensemble(reps, seed, |s| integrate_feller(&p, kin, st, horizon, s, &sde_opts))?
        }
    };
    Ok(Batch {
        label,
        model,
        params: p,
        init,
        trajectories,
        wall_time: started.elapsed().as_secs_f64(),
    })
}
