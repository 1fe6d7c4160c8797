use nalgebra::Vector2;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::RunConfig;
use super::runner::{aligned_step, Batch};
use crate::deterministic::{
    integrate_chemostat_ode, integrate_fluctuation_moments, GaussianLaw2, OdeState2,
};
use crate::error::{Error, Result};
use crate::fluctuations::stats::mean_cov;
use crate::fluctuations::{
    confidence_ellipse, estimate_qsd, extinction_stats, fluctuation_paths, qv_check, summarize,
};
use crate::kinetics::{find_equilibria, EquilibriumKind, Kinetics};
use crate::stationary::{discrete_gaussian_approx, limit_law};
use crate::trajectory::{ModelTag, Trajectory};

/// Plain numeric table destined for a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

const HISTOGRAM_BINS: usize = 30;
const ELLIPSE_POINTS: usize = 200;

fn num(x: f64) -> String {
    x.to_string()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialise")
}

/// Statistics of one batch. Also writes the `(Q, R)` coordinates into the
/// frames of the jump and diffusion models.
pub(crate) fn analyse(config: &RunConfig, kin: &Kinetics, batch: &mut Batch) -> Result<(Value, Vec<Table>)> {
    let p = batch.params;
    let n = p.scale;
    let a = &config.analysis;
    let prefix = if config.scenario == super::config::Scenario::Compare {
        format!("{}_{}_", batch.label, batch.model)
    } else {
        String::new()
    };
    let mut tables = Vec::new();
    let mut report = serde_json::Map::new();
    report.insert("label".into(), json!(batch.label));
    report.insert("model".into(), to_value(&batch.model));
    report.insert("params".into(), to_value(&p));
    report.insert("initial_state".into(), to_value(&batch.init));

    let equilibria = find_equilibria(kin, &p)?;
    let stable = equilibria.iter().find(|e| e.kind == EquilibriumKind::StableInterior);
    let law = stable.map(|e| limit_law(&p, kin, e)).transpose()?;
    let reference = law.as_ref().map(|l| discrete_gaussian_approx(l, n));
    report.insert("equilibria".into(), to_value(&equilibria));
    report.insert("limit_law".into(), law.as_ref().map_or(Value::Null, to_value));
    report.insert("reference_law".into(), reference.as_ref().map_or(Value::Null, to_value));
    report.insert("ensemble".into(), to_value(&summarize(&batch.trajectories, config.seed)?));

    let fluctuating = matches!(
        batch.model,
        ModelTag::CrumpYoung | ModelTag::Ibm | ModelTag::SdeHat | ModelTag::SdeFeller | ModelTag::SdeCyeds
    );
    if a.fluctuations && fluctuating {
        report.insert("fluctuations".into(), fluctuations(config, kin, batch)?);
    }

    let absorbs = batch.model.absorbs();
    let mut sample_law = None;
    if a.qsd && absorbs {
        let t = snap_to_grid(&batch.trajectories[0], a.qsd_time.unwrap_or(config.horizon));
        match estimate_qsd(&batch.trajectories, t, reference.as_ref()) {
            Ok(q) => {
                if !q.degenerate {
                    sample_law = Some(GaussianLaw2 {
                        mean: Vector2::new(q.at.mean[0], q.at.mean[1]),
                        cov: nalgebra::Matrix2::new(q.at.cov[0][0], q.at.cov[0][1], q.at.cov[1][0], q.at.cov[1][1]),
                    });
                }
                tables.push(histogram(&format!("{prefix}qsd_histogram"), &batch.trajectories, t));
                report.insert("qsd".into(), to_value(&q));
            }
            Err(Error::EmptyQsd { time }) => {
                report.insert("qsd".into(), json!({ "time": time, "survivors": 0 }));
            }
            Err(e) => return Err(e),
        }
    } else if batch.trajectories.len() > 1 {
        let xs: Vec<(f64, f64)> = batch
            .trajectories
            .iter()
            .filter_map(|t| t.last().map(|f| (f.count, f.substrate)))
            .collect();
        let (mean, cov) = mean_cov(&xs);
        sample_law = Some(GaussianLaw2 { mean, cov });
    }

    if a.ellipse {
        let mut ellipses = serde_json::Map::new();
        let mut rows = Vec::new();
        for (name, l) in [("sample", sample_law), ("reference", reference)] {
            let Some(l) = l else { continue };
            let Ok(e) = confidence_ellipse(&l, a.ellipse_level) else { continue };
            rows.extend(e.boundary(ELLIPSE_POINTS).into_iter().map(|x| vec![name.to_string(), num(x[0]), num(x[1])]));
            ellipses.insert(name.into(), to_value(&e));
        }
        report.insert("ellipses".into(), Value::Object(ellipses));
        tables.push(Table {
            name: format!("{prefix}ellipse"),
            header: vec!["law", "N", "S"],
            rows,
        });
    }

    if a.extinction && absorbs {
        let ext = extinction_stats(&batch.trajectories, None)?;
        tables.push(Table {
            name: format!("{prefix}survival"),
            header: vec!["time", "fraction"],
            rows: ext.survival.iter().map(|s| vec![num(s.time), num(s.fraction)]).collect(),
        });
        report.insert("extinction".into(), to_value(&ext));
    }

    if a.qv && batch.model == ModelTag::Ibm && batch.trajectories.len() > 1 {
        let mut qv = serde_json::Map::new();
        for (k, name) in [(0, "constant"), (1, "mass")] {
            let r = qv_check(&batch.trajectories, k, n)?;
            tables.push(Table {
                name: format!("{prefix}qv_{name}"),
                header: vec!["time", "observed", "observed_se", "predicted", "predicted_division", "predicted_death"],
                rows: r
                    .points
                    .iter()
                    .map(|q| {
                        [q.time, q.observed, q.observed_se, q.predicted, q.predicted_division, q.predicted_death]
                            .map(num)
                            .to_vec()
                    })
                    .collect(),
            });
            qv.insert(name.into(), to_value(&r));
        }
        report.insert("qv".into(), Value::Object(qv));
    }
    Ok((Value::Object(report), tables))
}

fn snap_to_grid(tr: &Trajectory, t: f64) -> f64 {
    tr.frames
        .iter()
        .map(|f| f.time)
        .min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()))
        .unwrap_or(t)
}

/// `(Q, R)` along every path, and their moments at the horizon against the
/// moment-ODE Gaussian.
fn fluctuations(config: &RunConfig, kin: &Kinetics, batch: &mut Batch) -> Result<Value> {
    let p = batch.params;
    let n = p.scale;
    let dt = aligned_step(config.horizon, config.intervals, config.dt);
    let det = OdeState2::new(batch.init.population / n, batch.init.substrate);
    let ode = integrate_chemostat_ode(&p, kin, det, config.horizon, dt)?;
    if batch.model != ModelTag::SdeCyeds {
        let paths = fluctuation_paths(&batch.trajectories, &ode, n)?;
        for (tr, path) in batch.trajectories.iter_mut().zip(paths) {
            for (f, (q, r)) in tr.frames.iter_mut().zip(path.q.into_iter().zip(path.r)) {
                f.q = Some(q);
                f.r = Some(r);
            }
        }
    }
    let last: Vec<(f64, f64)> = batch
        .trajectories
        .iter()
        .filter_map(|t| t.last().and_then(|f| f.q.zip(f.r)))
        .collect();
    let predicted = integrate_fluctuation_moments(
        &p,
        kin,
        &ode,
        GaussianLaw2::dirac(Vector2::zeros()),
        config.horizon,
        dt,
    )?;
    let sample = (last.len() > 1).then(|| {
        let (mean, cov) = mean_cov(&last);
        GaussianLaw2 { mean, cov }
    });
    Ok(json!({
        "time": config.horizon,
        "sample": sample.as_ref().map_or(Value::Null, to_value),
        "predicted": to_value(predicted.last()),
    }))
}

/// Histograms of the surviving `N` and `S` at `t`.
fn histogram(name: &str, ensemble: &[Trajectory], t: f64) -> Table {
    let alive: Vec<(f64, f64)> = ensemble
        .iter()
        .filter_map(|tr| tr.frame_at(t))
        .filter(|f| f.count > 0.0)
        .map(|f| (f.count, f.substrate))
        .collect();
    let mut rows = Vec::new();
    for (var, pick) in [("N", 0usize), ("S", 1)] {
        let xs: Vec<f64> = alive.iter().map(|x| if pick == 0 { x.0 } else { x.1 }).collect();
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) {
            continue;
        }
        let width = if hi > lo { (hi - lo) / HISTOGRAM_BINS as f64 } else { 1.0 };
        let mut counts = [0usize; HISTOGRAM_BINS];
        for x in &xs {
            let k = (((x - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
            counts[k] += 1;
        }
        for (k, c) in counts.iter().enumerate() {
            let a = lo + k as f64 * width;
            rows.push(vec![var.to_string(), num(a), num(a + width), c.to_string()]);
        }
    }
    Table {
        name: name.to_string(),
        header: vec!["variable", "bin_low", "bin_high", "count"],
        rows,
    }
}
