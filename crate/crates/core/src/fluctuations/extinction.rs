use serde::Serialize;

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalPoint {
    pub time: f64,
    pub fraction: f64,
}

/// Least-squares fit `ln P(T0 > t) ≈ intercept − rate · t` on a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub window: (f64, f64),
    pub points: usize,
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtinctionReport {
    pub replicates: usize,
    pub extinct: usize,
    pub extinction_times: Vec<f64>,
    pub survival: Vec<SurvivalPoint>,
    pub median: Option<f64>,
    pub p95: Option<f64>,
    /// `None` without extinctions or with too few points in the window.
    pub fit: Option<TailFit>,
}

impl ExtinctionReport {
    pub fn final_survival(&self) -> f64 {
        self.survival.last().map_or(1.0, |p| p.fraction)
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Empirical survival curve on the frame grid and an exponential tail fit.
/// `window` defaults to `[median, 95th percentile]` of the extinction times.
pub fn extinction_stats(ensemble: &[Trajectory], window: Option<(f64, f64)>) -> Result<ExtinctionReport> {
    let first = ensemble
        .first()
        .ok_or_else(|| Error::InsufficientData("empty ensemble".into()))?;
    let mut times: Vec<f64> = ensemble.iter().filter_map(|t| t.extinction_time).collect();
    times.sort_by(f64::total_cmp);
    let reps = ensemble.len() as f64;
    let survival: Vec<SurvivalPoint> = first
        .frames
        .iter()
        .map(|f| SurvivalPoint {
            time: f.time,
            fraction: (ensemble.len() - times.partition_point(|&t0| t0 <= f.time)) as f64 / reps,
        })
        .collect();
    let (median, p95) = if times.is_empty() {
        (None, None)
    } else {
        (Some(quantile(&times, 0.5)), Some(quantile(&times, 0.95)))
    };
    let fit = window
        .or(median.zip(p95))
        .and_then(|w| fit_tail(&survival, w));
    Ok(ExtinctionReport {
        replicates: ensemble.len(),
        extinct: times.len(),
        extinction_times: times,
        survival,
        median,
        p95,
        fit,
    })
}

fn fit_tail(survival: &[SurvivalPoint], window: (f64, f64)) -> Option<TailFit> {
    let pts: Vec<(f64, f64)> = survival
        .iter()
        .filter(|p| p.time >= window.0 && p.time <= window.1 && p.fraction > 0.0)
        .map(|p| (p.time, p.fraction.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(TailFit {
        window,
        points: pts.len(),
        rate: -slope,
        intercept: my - slope * mx,
        r_squared,
    })
}
