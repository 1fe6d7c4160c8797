use crate::error::{Error, Result};
use crate::kinetics::{DivisionKernel, MonotoneCubic};

/// C¹ test function `f` on `[0, M]` paired with the population measure.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    Constant(f64),
    /// `f(x) = x`.
    Linear,
    /// `Σ c_p x^p`, coefficients from degree 0 upwards.
    Polynomial(Vec<f64>),
    Sampled(MonotoneCubic),
}

impl TestFunction {
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config(
                "polynomial test function needs finite coefficients".into(),
            ));
        }
        Ok(TestFunction::Polynomial(coeffs))
    }

    pub fn sampled(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        Ok(TestFunction::Sampled(MonotoneCubic::new(xs, ys)?))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Constant(c) => *c,
            TestFunction::Linear => x,
            TestFunction::Polynomial(c) => horner(c, x),
            TestFunction::Sampled(curve) => curve.eval(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            TestFunction::Constant(_) => 0.0,
            TestFunction::Linear => 1.0,
            TestFunction::Polynomial(c) => {
                let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(p, v)| p as f64 * v).collect();
                horner(&d, x)
            }
            TestFunction::Sampled(curve) => curve.derivative(x),
        }
    }

    /// Polynomial coefficients when `f` is a polynomial in disguise.
    fn coefficients(&self) -> Option<Vec<f64>> {
        match self {
            TestFunction::Constant(c) => Some(vec![*c]),
            TestFunction::Linear => Some(vec![0.0, 1.0]),
            TestFunction::Polynomial(c) => Some(c.clone()),
            TestFunction::Sampled(_) => None,
        }
    }

    /// Precompute the division-jump moments of `f` under `kernel`.
    pub fn prepare(&self, kernel: DivisionKernel) -> PreparedTestFunction {
        let polys = self.coefficients().map(|c| jump_polynomials(&c, kernel));
        PreparedTestFunction {
            f: self.clone(),
            kernel,
            polys,
        }
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

/// Coefficients (in `x`) of `E[J_f(α, x)]` and `E[J_f(α, x)²]` where
/// `J_f(α, x) = f(αx) + f((1 − α)x) − f(x)`.
fn jump_polynomials(c: &[f64], kernel: DivisionKernel) -> (Vec<f64>, Vec<f64>) {
    let d = c.len();
    let m = |p: usize, q: usize| kernel.moment(p as u32, q as u32);
    // h_p(α) = α^p + (1 − α)^p − 1.
    let mean_h: Vec<f64> = (0..d).map(|p| m(p, 0) + m(0, p) - 1.0).collect();
    let mut cross = vec![vec![0.0; d]; d];
    for p in 0..d {
        for q in 0..d {
            cross[p][q] = m(p + q, 0) + m(p, q) + m(q, p) + m(0, p + q)
                - m(p, 0) - m(0, p) - m(q, 0) - m(0, q)
                + 1.0;
        }
    }
    let mean: Vec<f64> = (0..d).map(|p| c[p] * mean_h[p]).collect();
    let mut square = vec![0.0; 2 * d - 1];
    for p in 0..d {
        for q in 0..d {
            square[p + q] += c[p] * c[q] * cross[p][q];
        }
    }
    (mean, square)
}

/// A test function with its division-jump moments ready for evaluation
/// inside the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedTestFunction {
    pub f: TestFunction,
    kernel: DivisionKernel,
    polys: Option<(Vec<f64>, Vec<f64>)>,
}

impl PreparedTestFunction {
    /// `(E_Q[J_f(α, x)], E_Q[J_f(α, x)²])`.
    pub fn jump_moments(&self, x: f64) -> (f64, f64) {
        match &self.polys {
            Some((mean, square)) => (horner(mean, x), horner(square, x)),
            None => {
                let fx = self.f.eval(x);
                let jump = |a: f64| self.f.eval(a * x) + self.f.eval((1.0 - a) * x) - fx;
                (
                    self.kernel.expect(jump),
                    self.kernel.expect(|a| jump(a).powi(2)),
                )
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.f.eval(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.f.derivative(x)
    }
}
