use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};

/// Solution of `A Σ + Σ Aᵀ + C Cᵀ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryCov {
    pub cov: Matrix2<f64>,
    /// `C = 0`: the stationary law is the point mass and `Σ = 0` is returned
    /// whatever the stability of `A`.
    pub degenerate: bool,
}

pub fn is_hurwitz(a: &Matrix2<f64>) -> bool {
    a.trace() < 0.0 && a.determinant() > 0.0
}

/// Stationary covariance of `dZ = A Z dt + C dB` by a direct solve for the
/// three free entries of the symmetric `Σ`.
pub fn lyapunov_stationary_cov(a: &Matrix2<f64>, c: &Vector2<f64>) -> Result<StationaryCov> {
    if c.iter().all(|&v| v == 0.0) {
        return Ok(StationaryCov {
            cov: Matrix2::zeros(),
            degenerate: true,
        });
    }
    if !is_hurwitz(a) {
        return Err(Error::Stability(format!(
            "drift matrix is not Hurwitz (trace {}, det {}): no stationary covariance",
            a.trace(),
            a.determinant()
        )));
    }
    let (a11, a12, a21, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let cc = c * c.transpose();
    // Unknowns (σ11, σ12, σ22); rows are the (1,1), (1,2), (2,2) entries.
    let m = Matrix3::new(
        2.0 * a11, 2.0 * a12, 0.0,
        a21, a11 + a22, a12,
        0.0, 2.0 * a21, 2.0 * a22,
    );
    let rhs = -Vector3::new(cc[(0, 0)], cc[(0, 1)], cc[(1, 1)]);
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Stability("singular Lyapunov system".into()))?;
    Ok(StationaryCov {
        cov: Matrix2::new(x[0], x[1], x[1], x[2]),
        degenerate: false,
    })
}

/// `A Σ + Σ Aᵀ + C Cᵀ`.
pub fn lyapunov_residual(a: &Matrix2<f64>, c: &Vector2<f64>, sigma: &Matrix2<f64>) -> Matrix2<f64> {
    a * sigma + sigma * a.transpose() + c * c.transpose()
}
