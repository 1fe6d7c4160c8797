use serde::Serialize;

use crate::deterministic::{GaussianLaw2, PSD_TOLERANCE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EllipseShape {
    Ellipse,
    /// Rank-one covariance.
    Segment,
    /// Zero covariance.
    Point,
}

/// `{x : (x − m)ᵀ Σ⁻¹ (x − m) <= q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    /// Semi-major then semi-minor axis, `√(q λ)`.
    pub semi_axes: [f64; 2],
    /// Direction of the major axis (radians from the first coordinate).
    pub angle: f64,
    pub level: f64,
    /// Chi-square (2 d.o.f.) quantile at `level`.
    pub quantile: f64,
    pub shape: EllipseShape,
}

/// Chi-square quantile with two degrees of freedom: `−2 ln(1 − p)`.
pub fn chi2_2_quantile(level: f64) -> f64 {
    -2.0 * (-level).ln_1p()
}

impl Ellipse {
    fn axes(&self) -> ([f64; 2], [f64; 2]) {
        let (s, c) = self.angle.sin_cos();
        ([c, s], [-s, c])
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        let (major, minor) = self.axes();
        let u = major[0] * d[0] + major[1] * d[1];
        let v = minor[0] * d[0] + minor[1] * d[1];
        let [a, b] = self.semi_axes;
        match self.shape {
            EllipseShape::Ellipse => (u / a).powi(2) + (v / b).powi(2) <= 1.0,
            EllipseShape::Segment => {
                v.abs() <= 1e-12 * (a + d[0].abs() + d[1].abs()) && u.abs() <= a
            }
            EllipseShape::Point => d[0] == 0.0 && d[1] == 0.0,
        }
    }

    /// `points` points on the boundary, counter-clockwise from the end of the
    /// major axis.
    pub fn boundary(&self, points: usize) -> Vec<[f64; 2]> {
        let (major, minor) = self.axes();
        let [a, b] = self.semi_axes;
        (0..points)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / points as f64;
                let (u, v) = (a * th.cos(), b * th.sin());
                [
                    self.center[0] + u * major[0] + v * minor[0],
                    self.center[1] + u * major[1] + v * minor[1],
                ]
            })
            .collect()
    }
}

/// Confidence region of probability `level` for a bivariate normal law.
/// Singular covariances give a segment or a point rather than an error.
pub fn confidence_ellipse(law: &GaussianLaw2, level: f64) -> Result<Ellipse> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    if !law.is_psd(PSD_TOLERANCE) {
        return Err(Error::Domain(format!("covariance is not PSD: {:?}", law.cov)));
    }
    let q = chi2_2_quantile(level);
    let (vals, vecs) = law.eigen();
    let (small, big) = (vals[0].max(0.0), vals[1].max(0.0));
    // Rank is judged on the correlation, not on the eigenvalue ratio: the two
    // coordinates usually carry units many orders of magnitude apart.
    let (a, b) = law.variances();
    let shape = if big == 0.0 {
        EllipseShape::Point
    } else if law.cov.determinant() <= PSD_TOLERANCE * (a * b).max(0.0) {
        EllipseShape::Segment
    } else {
        EllipseShape::Ellipse
    };
    let major = vecs.column(1);
    Ok(Ellipse {
        center: [law.mean[0], law.mean[1]],
        semi_axes: [
            (q * big).sqrt(),
            if shape == EllipseShape::Ellipse { (q * small).sqrt() } else { 0.0 },
        ],
        angle: major[1].atan2(major[0]),
        level,
        quantile: q,
        shape,
    })
}
