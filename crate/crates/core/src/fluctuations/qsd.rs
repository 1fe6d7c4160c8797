use serde::Serialize;

use super::stats::{ks_one_sample, mean_cov, normal_cdf, KsResult};
use crate::deterministic::{rows2, GaussianLaw2};
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Largest tolerated gap between sample and reference correlation.
pub const QSD_CORRELATION_TOLERANCE: f64 = 0.02;
/// Largest tolerated relative gap between sample and reference variances.
pub const QSD_VARIANCE_TOLERANCE: f64 = 0.15;
/// KS p-values below this flag a marginal as non-Gaussian.
pub const QSD_KS_LEVEL: f64 = 0.01;

/// Moments of `(N, S)` over the replicates alive at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivorMoments {
    pub time: f64,
    pub survivors: usize,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
    /// `None` when a marginal has zero variance.
    pub correlation: Option<f64>,
}

/// Moment drift between `T/2` and `T`, relative to the values at `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stabilization {
    pub half: SurvivorMoments,
    pub mean_shift: [f64; 2],
    pub variance_shift: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianComparison {
    pub reference: GaussianLaw2,
    pub correlation_gap: Option<f64>,
    /// Sample variance over reference variance, per coordinate.
    pub variance_ratio: [f64; 2],
    pub ks_population: KsResult,
    pub ks_substrate: KsResult,
    pub deviates: bool,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QsdReport {
    pub replicates: usize,
    pub at: SurvivorMoments,
    pub degenerate: bool,
    pub stabilization: Option<Stabilization>,
    pub comparison: Option<GaussianComparison>,
}

fn survivors_at(ensemble: &[Trajectory], time: f64) -> Result<Vec<(f64, f64)>> {
    ensemble
        .iter()
        .map(|tr| {
            tr.frame_at(time).ok_or_else(|| {
                Error::Alignment(format!("replicate {} has no frame at t = {time}", tr.replicate))
            })
        })
        .filter(|f| f.as_ref().map_or(true, |f| f.count > 0.0))
        .map(|f| f.map(|f| (f.count, f.substrate)))
        .collect()
}

fn moments(time: f64, xs: &[(f64, f64)]) -> SurvivorMoments {
    if xs.len() < 2 {
        let mean = xs.first().map_or([f64::NAN; 2], |&(a, b)| [a, b]);
        return SurvivorMoments {
            time,
            survivors: xs.len(),
            mean,
            cov: [[0.0; 2]; 2],
            correlation: None,
        };
    }
    let (mean, cov) = mean_cov(xs);
    let law = GaussianLaw2 { mean, cov };
    SurvivorMoments {
        time,
        survivors: xs.len(),
        mean: [mean[0], mean[1]],
        cov: rows2(&cov),
        correlation: law.correlation(),
    }
}

/// Moments of the jump model at `time` conditioned on survival, with a
/// stabilisation diagnostic (`T/2` against `T`) and an optional comparison to
/// a reference Gaussian law.
pub fn estimate_qsd(
    ensemble: &[Trajectory],
    time: f64,
    reference: Option<&GaussianLaw2>,
) -> Result<QsdReport> {
    let alive = survivors_at(ensemble, time)?;
    if alive.is_empty() {
        return Err(Error::EmptyQsd { time });
    }
    let at = moments(time, &alive);
    let degenerate = at.correlation.is_none();

    let stabilization = survivors_at(ensemble, 0.5 * time)
        .ok()
        .filter(|h| h.len() >= 2)
        .map(|h| {
            let half = moments(0.5 * time, &h);
            let rel = |a: f64, b: f64| if b != 0.0 { (a - b) / b } else { a - b };
            Stabilization {
                mean_shift: [rel(half.mean[0], at.mean[0]), rel(half.mean[1], at.mean[1])],
                variance_shift: [
                    rel(half.cov[0][0], at.cov[0][0]),
                    rel(half.cov[1][1], at.cov[1][1]),
                ],
                half,
            }
        });

    let comparison = match reference {
        Some(law) if !degenerate => Some(compare(&alive, &at, law)?),
        _ => None,
    };
    Ok(QsdReport {
        replicates: ensemble.len(),
        at,
        degenerate,
        stabilization,
        comparison,
    })
}

fn compare(alive: &[(f64, f64)], at: &SurvivorMoments, law: &GaussianLaw2) -> Result<GaussianComparison> {
    let (vn, vs) = law.variances();
    let variance_ratio = [at.cov[0][0] / vn, at.cov[1][1] / vs];
    let correlation_gap = at.correlation.zip(law.correlation()).map(|(a, b)| a - b);
    let pop: Vec<f64> = alive.iter().map(|x| x.0).collect();
    let sub: Vec<f64> = alive.iter().map(|x| x.1).collect();
    let ks_population = ks_one_sample(&pop, |x| normal_cdf(x, law.mean[0], vn.sqrt()))?;
    let ks_substrate = ks_one_sample(&sub, |x| normal_cdf(x, law.mean[1], vs.sqrt()))?;

    let mut reasons = Vec::new();
    match correlation_gap {
        Some(g) if g.abs() > QSD_CORRELATION_TOLERANCE => {
            reasons.push(format!("correlation differs by {g:+.4}"))
        }
        None => reasons.push("reference correlation undefined".into()),
        _ => {}
    }
    for (name, r) in ["population", "substrate"].iter().zip(variance_ratio) {
        if (r - 1.0).abs() > QSD_VARIANCE_TOLERANCE {
            reasons.push(format!("{name} variance ratio {r:.3}"));
        }
    }
    for (name, ks) in [("population", ks_population), ("substrate", ks_substrate)] {
        if ks.p_value < QSD_KS_LEVEL {
            reasons.push(format!("{name} marginal rejected by KS (p = {:.2e})", ks.p_value));
        }
    }
    Ok(GaussianComparison {
        reference: *law,
        correlation_gap,
        variance_ratio,
        ks_population,
        ks_substrate,
        deviates: !reasons.is_empty(),
        reasons,
    })
}
