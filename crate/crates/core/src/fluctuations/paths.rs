use serde::Serialize;

use crate::deterministic::OdePath;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// `Q^n_t = √n (N^n_t / n − N_t)` and `R^n_t = √n (S^n_t − S_t)` along one
/// replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationPath {
    pub replicate: u64,
    pub times: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
}

impl FluctuationPath {
    /// `(N^n_t, S^n_t)` recovered from the deterministic path.
    pub fn reconstruct(&self, ode: &OdePath, n: f64) -> Result<Vec<(f64, f64)>> {
        let root = n.sqrt();
        self.times
            .iter()
            .zip(self.q.iter().zip(&self.r))
            .map(|(&t, (&q, &r))| {
                let st = node(ode, t)?;
                Ok((n * st.population + root * q, st.substrate + r / root))
            })
            .collect()
    }
}

fn node(ode: &OdePath, t: f64) -> Result<crate::deterministic::OdeState2> {
    ode.node_at(t)
        .ok_or_else(|| Error::Alignment(format!("ODE path has no step at t = {t}")))
}

/// Fluctuations of each jump-model replicate around the deterministic path.
/// Every frame time must be a step of `ode`.
pub fn fluctuation_paths(ensemble: &[Trajectory], ode: &OdePath, n: f64) -> Result<Vec<FluctuationPath>> {
    if !(n >= 1.0) {
        return Err(Error::Config(format!("scale must be >= 1, got {n}")));
    }
    let root = n.sqrt();
    ensemble
        .iter()
        .map(|tr| {
            let mut path = FluctuationPath {
                replicate: tr.replicate,
                times: Vec::with_capacity(tr.frames.len()),
                q: Vec::with_capacity(tr.frames.len()),
                r: Vec::with_capacity(tr.frames.len()),
            };
            for f in &tr.frames {
                let st = node(ode, f.time)?;
                path.times.push(f.time);
                path.q.push(root * (f.count / n - st.population));
                path.r.push(root * (f.substrate - st.substrate));
            }
            Ok(path)
        })
        .collect()
}
