use serde::Serialize;

use super::stats::mean_var;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Observed against predicted quadratic variation of
/// `M^n_t(f) = √n (⟨ν̄_t, f⟩ − ⟨ν̄_0, f⟩ − ∫₀ᵗ drift)` at one grid time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QvPoint {
    pub time: f64,
    pub mean_martingale: f64,
    /// `E[(M^n_t)²]` over replicates.
    pub observed: f64,
    pub observed_se: f64,
    /// `E ∫₀ᵗ ⟨ν̄_u, b E_Q[J_f²] + D f²⟩ du`.
    pub predicted: f64,
    pub predicted_division: f64,
    pub predicted_death: f64,
    /// Sum of squared jumps, division and withdrawal parts.
    pub realized_division: f64,
    pub realized_death: f64,
    /// `observed / predicted`, `None` while nothing is predicted.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QvReport {
    pub probe: usize,
    pub replicates: usize,
    pub points: Vec<QvPoint>,
}

impl QvReport {
    pub fn last(&self) -> &QvPoint {
        self.points.last().expect("report has the initial point")
    }
}

/// Quadratic-variation check for probe `probe` over an ensemble of
/// mass-structured runs. `scale` is the `n` the runs used.
pub fn qv_check(ensemble: &[Trajectory], probe: usize, scale: f64) -> Result<QvReport> {
    if ensemble.len() < 2 {
        return Err(Error::InsufficientData(
            "quadratic-variation check needs at least two replicates".into(),
        ));
    }
    let records: Vec<_> = ensemble
        .iter()
        .map(|tr| {
            tr.probes.get(probe).ok_or_else(|| {
                Error::InsufficientData(format!(
                    "replicate {} carries no probe {probe}: run the simulation with that test function",
                    tr.replicate
                ))
            })
        })
        .collect::<Result<_>>()?;
    let frames = ensemble[0].frames.len();
    for (tr, rec) in ensemble.iter().zip(&records) {
        if tr.frames.len() != frames || rec.value.len() != frames {
            return Err(Error::Alignment(format!(
                "replicate {} has {} frames, expected {frames}",
                tr.replicate,
                tr.frames.len()
            )));
        }
    }
    let root = scale.sqrt();
    let reps = ensemble.len() as f64;
    let points = (0..frames)
        .map(|j| {
            let m: Vec<f64> = records
                .iter()
                .map(|r| root * (r.value[j] - r.value[0] - r.drift[j]))
                .collect();
            let squares: Vec<f64> = m.iter().map(|v| v * v).collect();
            let (observed, var_sq) = mean_var(&squares);
            let avg = |f: &dyn Fn(&crate::trajectory::ProbeRecord) -> f64| {
                records.iter().map(|r| f(r)).sum::<f64>() / reps
            };
            let predicted_division = avg(&|r| r.predicted_division[j]);
            let predicted_death = avg(&|r| r.predicted_death[j]);
            let predicted = predicted_division + predicted_death;
            QvPoint {
                time: ensemble[0].frames[j].time,
                mean_martingale: m.iter().sum::<f64>() / reps,
                observed,
                observed_se: (var_sq / reps).sqrt(),
                predicted,
                predicted_division,
                predicted_death,
                realized_division: avg(&|r| r.realized_division[j]),
                realized_death: avg(&|r| r.realized_death[j]),
                ratio: (predicted > 0.0).then(|| observed / predicted),
            }
        })
        .collect();
    Ok(QvReport {
        probe,
        replicates: ensemble.len(),
        points,
    })
}
