//! Small sample-statistics toolkit: moments, standard errors, bootstrap and
//! Kolmogorov–Smirnov tests.

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Sample mean vector and unbiased covariance matrix of paired data.
pub fn mean_cov(xs: &[(f64, f64)]) -> (Vector2<f64>, Matrix2<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().fold(Vector2::zeros(), |acc, &(a, b)| acc + Vector2::new(a, b)) / n;
    let mut cov = Matrix2::zeros();
    for &(a, b) in xs {
        let d = Vector2::new(a - mean[0], b - mean[1]);
        cov += d * d.transpose();
    }
    (mean, cov / (n - 1.0))
}

/// Standard errors of the entries of [`mean_cov`] from fourth moments:
/// `se(Ĉov(X, Y))² ≈ (E[(X − μX)²(Y − μY)²] − Cov²) / n`.
pub fn cov_standard_errors(xs: &[(f64, f64)]) -> Matrix2<f64> {
    let n = xs.len() as f64;
    let (mean, cov) = mean_cov(xs);
    let mut m4 = Matrix2::<f64>::zeros();
    for &(a, b) in xs {
        let d = [a - mean[0], b - mean[1]];
        for i in 0..2 {
            for j in 0..2 {
                m4[(i, j)] += (d[i] * d[j]).powi(2);
            }
        }
    }
    let mut se = Matrix2::<f64>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            se[(i, j)] = ((m4[(i, j)] / n - cov[(i, j)].powi(2)).max(0.0) / n).sqrt();
        }
    }
    se
}

/// Bootstrap standard error of each output of `stat`.
pub fn bootstrap_se<T: Copy, R: Rng + ?Sized, const K: usize>(
    data: &[T],
    resamples: usize,
    rng: &mut R,
    stat: impl Fn(&[T]) -> [f64; K],
) -> [f64; K] {
    let mut sums = [0.0; K];
    let mut squares = [0.0; K];
    let mut buf = Vec::with_capacity(data.len());
    for _ in 0..resamples {
        buf.clear();
        buf.extend((0..data.len()).map(|_| data[rng.random_range(0..data.len())]));
        let v = stat(&buf);
        for k in 0..K {
            sums[k] += v[k];
            squares[k] += v[k] * v[k];
        }
    }
    let b = resamples as f64;
    std::array::from_fn(|k| {
        let m = sums[k] / b;
        ((squares[k] / b - m * m).max(0.0) * b / (b - 1.0)).sqrt()
    })
}

pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd).map(|d| d.cdf(x)).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("KS test on an empty sample".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d),
    })
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("KS test on an empty sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d),
    })
}

/// `P(K > λ)` for the Kolmogorov distribution.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powi(k as i32 - 1) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}
