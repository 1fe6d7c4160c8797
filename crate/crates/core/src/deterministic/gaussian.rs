use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector2, Vector4};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Bivariate normal law (mean vector, covariance matrix).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLaw2 {
    pub mean: Vector2<f64>,
    pub cov: Matrix2<f64>,
}

/// Four-dimensional normal law of `(N, S, Q, R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLaw4 {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

/// Tolerance on the smallest eigenvalue, relative to the trace.
pub const PSD_TOLERANCE: f64 = 1e-12;

impl GaussianLaw2 {
    /// Validating constructor: the covariance must be symmetric and PSD.
    pub fn new(mean: Vector2<f64>, cov: Matrix2<f64>) -> Result<Self> {
        let law = Self { mean, cov };
        if (cov[(0, 1)] - cov[(1, 0)]).abs() > 1e-12 * cov.abs().max().max(f64::MIN_POSITIVE) {
            return Err(Error::Domain(format!("covariance is not symmetric: {cov:?}")));
        }
        if !law.is_psd(PSD_TOLERANCE) {
            return Err(Error::Domain(format!("covariance is not PSD: {cov:?}")));
        }
        Ok(law)
    }

    /// Point mass at `mean`.
    pub fn dirac(mean: Vector2<f64>) -> Self {
        Self {
            mean,
            cov: Matrix2::zeros(),
        }
    }

    pub fn variances(&self) -> (f64, f64) {
        (self.cov[(0, 0)], self.cov[(1, 1)])
    }

    /// `None` when either marginal is degenerate.
    pub fn correlation(&self) -> Option<f64> {
        let (a, b) = self.variances();
        (a > 0.0 && b > 0.0).then(|| self.cov[(0, 1)] / (a * b).sqrt())
    }

    /// Eigenvalues ascending, with unit eigenvectors as matching columns.
    ///
    /// Closed form: the small eigenvalue is `det/λmax`, which keeps full
    /// relative precision when the two variances differ by many orders of
    /// magnitude.
    pub fn eigen(&self) -> (Vector2<f64>, Matrix2<f64>) {
        let (a, b) = self.variances();
        let c = 0.5 * (self.cov[(0, 1)] + self.cov[(1, 0)]);
        let half_gap = 0.5 * (a - b);
        let root = half_gap.hypot(c);
        let big = 0.5 * (a + b) + root;
        let det = a * b - c * c;
        let small = if big > 0.0 { det / big } else { 0.5 * (a + b) - root };
        // Eigenvector of `big`: pick the better conditioned of the two rows.
        let v = if c == 0.0 {
            if a >= b {
                Vector2::new(1.0, 0.0)
            } else {
                Vector2::new(0.0, 1.0)
            }
        } else if half_gap >= 0.0 {
            Vector2::new(half_gap + root, c).normalize()
        } else {
            Vector2::new(c, root - half_gap).normalize()
        };
        let w = Vector2::new(-v[1], v[0]);
        (Vector2::new(small, big), Matrix2::from_columns(&[w, v]))
    }

    pub fn is_psd(&self, rel_tol: f64) -> bool {
        let (v, _) = self.eigen();
        v[0] >= -rel_tol * self.cov.trace().abs()
    }
}

impl GaussianLaw4 {
    pub fn is_psd(&self, rel_tol: f64) -> bool {
        let sym = 0.5 * (self.cov + self.cov.transpose());
        let v = SymmetricEigen::new(sym).eigenvalues;
        v.min() >= -rel_tol * self.cov.trace().abs()
    }

    /// Marginal law of coordinates `(i, j)`.
    pub fn marginal(&self, i: usize, j: usize) -> GaussianLaw2 {
        GaussianLaw2 {
            mean: Vector2::new(self.mean[i], self.mean[j]),
            cov: Matrix2::new(
                self.cov[(i, i)],
                self.cov[(i, j)],
                self.cov[(j, i)],
                self.cov[(j, j)],
            ),
        }
    }
}

pub(crate) fn rows2(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

impl Serialize for GaussianLaw2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GaussianLaw2", 2)?;
        st.serialize_field("mean", &[self.mean[0], self.mean[1]])?;
        st.serialize_field("cov", &rows2(&self.cov))?;
        st.end()
    }
}

impl Serialize for GaussianLaw4 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<[f64; 4]> = (0..4)
            .map(|i| [self.cov[(i, 0)], self.cov[(i, 1)], self.cov[(i, 2)], self.cov[(i, 3)]])
            .collect();
        let mut st = s.serialize_struct("GaussianLaw4", 2)?;
        st.serialize_field("mean", &[self.mean[0], self.mean[1], self.mean[2], self.mean[3]])?;
        st.serialize_field("cov", &rows)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_indefinite_covariance() {
        let bad = Matrix2::new(1.0, 2.0, 2.0, 1.0);
        assert!(GaussianLaw2::new(Vector2::zeros(), bad).is_err());
        let asym = Matrix2::new(1.0, 0.1, 0.0, 1.0);
        assert!(GaussianLaw2::new(Vector2::zeros(), asym).is_err());
        let ok = Matrix2::new(4.0, 1.0, 1.0, 1.0);
        let law = GaussianLaw2::new(Vector2::zeros(), ok).unwrap();
        assert!((law.correlation().unwrap() - 0.5).abs() < 1e-15);
        assert!(GaussianLaw2::dirac(Vector2::zeros()).correlation().is_none());
    }

    #[test]
    fn eigen_keeps_precision_across_scales() {
        let cov = Matrix2::new(30_656.15, -0.003_737_024, -0.003_737_024, 5.1286e-10);
        let law = GaussianLaw2::new(Vector2::zeros(), cov).unwrap();
        let (v, w) = law.eigen();
        let det = cov[(0, 0)] * cov[(1, 1)] - cov[(0, 1)].powi(2);
        assert!((v[0] * v[1] / det - 1.0).abs() < 1e-12);
        for k in 0..2 {
            let r = cov * w.column(k) - v[k] * w.column(k);
            assert!(r.norm() <= 1e-12 * v[1]);
        }
    }

    #[test]
    fn eigen_is_ascending() {
        let law = GaussianLaw2::new(Vector2::zeros(), Matrix2::new(1.0, 0.0, 0.0, 4.0)).unwrap();
        let (v, w) = law.eigen();
        assert_eq!((v[0], v[1]), (1.0, 4.0));
        assert!((w[(1, 1)].abs() - 1.0).abs() < 1e-12);
    }
}
