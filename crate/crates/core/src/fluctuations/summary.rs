use serde::Serialize;

use super::stats::mean_cov;
use crate::deterministic::rows2;
use crate::error::{Error, Result};
use crate::trajectory::{ModelTag, Trajectory};

/// Ensemble moments of `(N, S)` at one output time, over all replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMoments {
    pub time: f64,
    pub alive: usize,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub model: ModelTag,
    pub replicates: usize,
    pub seed: u64,
    pub streams: Vec<u64>,
    pub moments: Vec<GridMoments>,
    /// Replicates alive at the last frame.
    pub survivors: usize,
    pub extinction_times: Vec<Option<f64>>,
    pub events: u64,
}

/// Per-frame sample moments. All replicates must share one frame grid.
pub fn summarize(ensemble: &[Trajectory], seed: u64) -> Result<EnsembleSummary> {
    let first = ensemble
        .first()
        .ok_or_else(|| Error::InsufficientData("empty ensemble".into()))?;
    for tr in ensemble {
        if tr.frames.len() != first.frames.len()
            || tr.frames.iter().zip(&first.frames).any(|(a, b)| a.time != b.time)
        {
            return Err(Error::Alignment(format!(
                "replicate {} does not share the frame grid of replicate {}",
                tr.replicate, first.replicate
            )));
        }
    }
    let moments = (0..first.frames.len())
        .map(|j| {
            let xs: Vec<(f64, f64)> = ensemble
                .iter()
                .map(|t| (t.frames[j].count, t.frames[j].substrate))
                .collect();
            let (mean, cov) = if xs.len() > 1 {
                mean_cov(&xs)
            } else {
                (nalgebra::Vector2::new(xs[0].0, xs[0].1), nalgebra::Matrix2::zeros())
            };
            GridMoments {
                time: first.frames[j].time,
                alive: xs.iter().filter(|x| x.0 > 0.0).count(),
                mean: [mean[0], mean[1]],
                cov: rows2(&cov),
            }
        })
        .collect::<Vec<_>>();
    let survivors = ensemble
        .iter()
        .filter(|t| t.last().is_some_and(|f| f.count > 0.0))
        .count();
    Ok(EnsembleSummary {
        model: first.model,
        replicates: ensemble.len(),
        seed,
        streams: ensemble.iter().map(|t| t.replicate).collect(),
        moments,
        survivors,
        extinction_times: ensemble.iter().map(|t| t.extinction_time).collect(),
        events: ensemble.iter().map(|t| t.event_count()).sum(),
    })
}
