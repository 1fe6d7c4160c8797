//! Long-time laws: the deterministic flow, the moment ODE and the closed
//! form agree, and the ellipse drawn from them is the right one.

use chemostat::deterministic::{
    integrate_chemostat_ode, integrate_fluctuation_moments, lyapunov_stationary_cov, DriftMatrices, GaussianLaw2,
    OdeState2,
};
use chemostat::fluctuations::{chi2_2_quantile, confidence_ellipse};
use chemostat::kinetics::find_equilibria;
use chemostat::stationary::{discrete_gaussian_approx, limit_law};
use chemostat::{ChemostatParams, Kinetics};
use nalgebra::Vector2;

#[test]
fn moment_covariance_converges_to_the_stationary_law() {
    let p = ChemostatParams::monod_reference(1e-6);
    let kin = Kinetics::monod_reference();
    let eq = find_equilibria(&kin, &p).unwrap()[1];
    let law = limit_law(&p, &kin, &eq).unwrap();
    let ode = integrate_chemostat_ode(&p, &kin, OdeState2::new(eq.population, eq.substrate), 300.0, 1e-3).unwrap();
    let path = integrate_fluctuation_moments(&p, &kin, &ode, GaussianLaw2::dirac(Vector2::zeros()), 300.0, 1e-3)
        .unwrap();
    let gap = (path.last().cov - law.fluctuation_cov()).abs().max();
    assert!(gap < 1e-6, "max-norm gap {gap}");
    // Lyapunov solve at the same point, third leg of the triangle.
    let m = DriftMatrices::at(&p, &kin, OdeState2::new(eq.population, eq.substrate));
    let lyap = lyapunov_stationary_cov(&m.drift, &m.noise).unwrap().cov;
    assert!((lyap - path.last().cov).abs().max() < 1e-6);
}

#[test]
fn rk4_is_fourth_order_on_the_monod_flow() {
    let p = ChemostatParams::monod_reference(1e-6);
    let kin = Kinetics::monod_reference();
    let init = OdeState2::new(500.0, 0.003);
    let end = |dt: f64| integrate_chemostat_ode(&p, &kin, init, 20.0, dt).unwrap().last();
    let reference = end(0.2 / 16.0);
    let err = |dt: f64| {
        let st = end(dt);
        ((st.population - reference.population) / reference.population)
            .abs()
            .max(((st.substrate - reference.substrate) / reference.substrate).abs())
    };
    let ratio = err(0.2) / err(0.1);
    assert!(ratio >= 12.0, "error ratio {ratio}");
}

#[test]
fn ellipse_round_trips_through_the_raw_scalars() {
    let p = ChemostatParams::monod_reference(1e-5);
    let kin = Kinetics::monod_reference();
    let eq = find_equilibria(&kin, &p).unwrap()[1];
    let law = limit_law(&p, &kin, &eq).unwrap();
    let n = 1.0;
    let e = confidence_ellipse(&discrete_gaussian_approx(&law, n), 0.95).unwrap();

    // Eigen-decomposition of [[a, c], [c, b]] by hand.
    let (a, b, c) = (n * law.alpha, law.beta / n, law.cross);
    let half = 0.5 * (a - b);
    let root = half.hypot(c);
    let big = 0.5 * (a + b) + root;
    // The product of the eigenvalues avoids cancellation in the small one.
    let small = (a * b - c * c) / big;
    let q = chi2_2_quantile(0.95);
    assert!(((q - 5.991464547107979) / q).abs() < 1e-12);
    assert!((e.semi_axes[0] / (q * big).sqrt() - 1.0).abs() < 1e-9);
    assert!((e.semi_axes[1] / (q * small).sqrt() - 1.0).abs() < 1e-6);
    assert_eq!(e.center, [eq.population, eq.substrate]);
    // The major axis points along (big − b, c), up to orientation.
    let dir = c.atan2(big - b);
    let turn = (e.angle - dir).rem_euclid(std::f64::consts::PI);
    assert!(turn.min(std::f64::consts::PI - turn) < 1e-9, "{} vs {dir}", e.angle);
}
