use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// Accepted candidate of a thinned Poisson process. `mark` is uniform on
/// `[0, intensity(time))` given acceptance and can be reused to pick the
/// event type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThinnedEvent {
    pub time: f64,
    pub mark: f64,
}

/// Next point after `start` of a homogeneous Poisson process of rate
/// `bound`, or `None` if it falls at or beyond `window_end`.
#[inline]
pub fn next_candidate<R: Rng + ?Sized>(
    start: f64,
    bound: f64,
    window_end: f64,
    rng: &mut R,
) -> Option<f64> {
    if bound <= 0.0 {
        return None;
    }
    let e: f64 = Exp1.sample(rng);
    let t = start + e / bound;
    (t < window_end).then_some(t)
}

/// First point after `start` of the Poisson process with intensity
/// `intensity(t) <= rate_bound`, by rejection against the constant bound.
///
/// `intensity` is called at increasing times only, so it may advance state
/// (an ODE, say) as a side effect. Returns `None` when no point falls before
/// `window_end`.
pub fn thinning_next_event<R: Rng + ?Sized>(
    start: f64,
    rate_bound: f64,
    window_end: f64,
    rng: &mut R,
    mut intensity: impl FnMut(f64) -> Result<f64>,
) -> Result<Option<ThinnedEvent>> {
    if !(rate_bound >= 0.0 && rate_bound.is_finite()) {
        return Err(Error::Kinetics(format!(
            "thinning bound must be finite and >= 0, got {rate_bound}"
        )));
    }
    let mut t = start;
    while let Some(c) = next_candidate(t, rate_bound, window_end, rng) {
        t = c;
        let rate = intensity(t)?;
        if !(rate >= 0.0) || rate > rate_bound * (1.0 + 1e-12) {
            return Err(Error::invariant(
                "thinning_bound",
                format!("intensity {rate} exceeds bound {rate_bound} at t = {t}"),
            ));
        }
        let mark = rng.random::<f64>() * rate_bound;
        if mark < rate {
            return Ok(Some(ThinnedEvent { time: t, mark }));
        }
    }
    Ok(None)
}
