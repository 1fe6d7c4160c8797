//! Ensemble checks of the exact simulators against closed-form moments.

use chemostat::deterministic::{integrate_chemostat_ode, integrate_fluctuation_moments, GaussianLaw2, OdeState2};
use chemostat::exact::{simulate_crump_young, simulate_ibm, CrumpYoungState, PopulationState, SimOptions};
use chemostat::fluctuations::extinction_stats;
use chemostat::fluctuations::stats::mean_var;
use chemostat::kinetics::DivisionKernel;
use chemostat::{ChemostatParams, Kinetics, MassKinetics, RngStream, Trajectory};

fn cy_ensemble(
    p: &ChemostatParams,
    kin: &Kinetics,
    init: CrumpYoungState,
    horizon: f64,
    reps: u64,
    seed: u64,
    intervals: usize,
) -> Vec<Trajectory> {
    let opts = SimOptions::default().with_intervals(intervals);
    (0..reps)
        .map(|i| simulate_crump_young(p, kin, init, horizon, RngStream::new(seed, i), &opts).unwrap())
        .collect()
}

fn column(ens: &[Trajectory], frame: usize, f: impl Fn(&chemostat::Frame) -> f64) -> Vec<f64> {
    ens.iter().map(|tr| f(&tr.frames[frame])).collect()
}

/// `|x̄ − target|` in standard errors.
fn z_mean(xs: &[f64], target: f64) -> f64 {
    let (m, v) = mean_var(xs);
    (m - target) / (v / xs.len() as f64).sqrt()
}

/// Same for the sample variance, using the fourth central moment.
fn z_var(xs: &[f64], target: f64) -> f64 {
    let n = xs.len() as f64;
    let (m, v) = mean_var(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    (v - target) / ((m4 - v * v) / n).sqrt()
}

#[test]
fn pure_death_mean_and_substrate() {
    let p = ChemostatParams::monod_reference(1e-8);
    let kin = Kinetics::zero(p.s_in);
    let ens = cy_ensemble(&p, &kin, CrumpYoungState::new(5, 0.001), 8.0, 10_000, 101, 8);
    for j in [1, 2, 4, 8] {
        let t = j as f64;
        let z = z_mean(&column(&ens, j, |f| f.count), 5.0 * (-0.5 * t).exp());
        assert!(z.abs() < 3.0, "t = {t}: z = {z}");
    }
    // Without growth nothing is consumed: the substrate relaxes in closed form.
    for tr in ens.iter().take(50) {
        let f = tr.last().unwrap();
        let exact = p.s_in + (0.001 - p.s_in) * (-0.5 * f.time).exp();
        assert!((f.substrate - exact).abs() < 1e-12, "{} vs {exact}", f.substrate);
    }
}

#[test]
fn pure_death_survival_rate() {
    let p = ChemostatParams::monod_reference(1e-8);
    let kin = Kinetics::zero(p.s_in);
    let ens = cy_ensemble(&p, &kin, CrumpYoungState::new(1, p.s_in), 12.0, 10_000, 102, 120);
    let report = extinction_stats(&ens, None).unwrap();
    let fit = report.fit.expect("extinctions occurred");
    assert!((fit.rate / p.dilution - 1.0).abs() < 0.1, "{fit:?}");
}

#[test]
fn critical_birth_death_keeps_its_mean() {
    let p = ChemostatParams::monod_reference(1e-7);
    let kin = Kinetics::constant(p.dilution, p.s_in);
    let ens = cy_ensemble(&p, &kin, CrumpYoungState::new(20, p.s_in), 6.0, 10_000, 103, 3);
    for j in 1..=3 {
        let t = 2.0 * j as f64;
        let counts = column(&ens, j, |f| f.count);
        let z = z_mean(&counts, 20.0);
        assert!(z.abs() < 3.0, "t = {t}: mean z = {z}");
        // Var N_t = 2 λ N0 t for the critical linear process.
        let z = z_var(&counts, 2.0 * p.dilution * 20.0 * t);
        assert!(z.abs() < 3.0, "t = {t}: var z = {z}");
    }
}

#[test]
fn supercritical_birth_death_moments() {
    // Constant rates make the count a linear birth–death process whatever
    // the substrate does.
    let p = ChemostatParams::monod_reference(1e-7);
    let (birth, death) = (0.8, p.dilution);
    let kin = Kinetics::constant(birth, p.s_in);
    let ens = cy_ensemble(&p, &kin, CrumpYoungState::new(10, p.s_in), 3.0, 10_000, 104, 3);
    let r = birth - death;
    for j in 1..=3 {
        let t = j as f64;
        let growth = (r * t).exp();
        let counts = column(&ens, j, |f| f.count);
        let z = z_mean(&counts, 10.0 * growth);
        assert!(z.abs() < 3.0, "t = {t}: mean z = {z}");
        let var = 10.0 * (birth + death) / r * growth * (growth - 1.0);
        let z = z_var(&counts, var);
        assert!(z.abs() < 3.0, "t = {t}: var z = {z}");
    }
}

#[test]
fn total_mass_relaxes_in_mean() {
    let p = ChemostatParams::monod_reference(1e-7);
    let kin = Kinetics::monod_reference();
    let (n0, s0) = (60, 0.001);
    let ens = cy_ensemble(&p, &kin, CrumpYoungState::new(n0, s0), 4.0, 4_000, 105, 4);
    let y = p.individual_yield();
    let initial = s0 + y * n0 as f64;
    for j in 1..=4 {
        let t = j as f64;
        let combined = column(&ens, j, |f| f.substrate + y * f.count);
        let target = p.s_in + (initial - p.s_in) * (-p.dilution * t).exp();
        let z = z_mean(&combined, target);
        assert!(z.abs() < 3.0, "t = {t}: z = {z}");
    }
}

#[test]
fn large_population_follows_the_ode() {
    let p = ChemostatParams::monod_reference(1e-5);
    let kin = Kinetics::monod_reference();
    let ens = cy_ensemble(&p, &kin, CrumpYoungState::new(5000, 0.003), 10.0, 200, 106, 10);
    let ode = integrate_chemostat_ode(&p, &kin, OdeState2::new(5000.0, 0.003), 10.0, 1e-3).unwrap();
    for t in [1.0, 5.0, 10.0] {
        let j = t as usize;
        let det = ode.node_at(t).unwrap();
        let z = z_mean(&column(&ens, j, |f| f.count), det.population);
        assert!(z.abs() < 3.0, "N at t = {t}: z = {z}");
        let z = z_mean(&column(&ens, j, |f| f.substrate), det.substrate);
        assert!(z.abs() < 3.0, "S at t = {t}: z = {z}");
    }
}

#[test]
fn short_time_population_variance() {
    let p = ChemostatParams::monod_reference(1e-6);
    let kin = Kinetics::monod_reference();
    let (n0, s0, t) = (500.0, 0.003, 0.05);
    let ens = cy_ensemble(&p, &kin, CrumpYoungState::new(500, s0), t, 10_000, 107, 1);
    let ode = integrate_chemostat_ode(&p, &kin, OdeState2::new(n0, s0), t, 1e-4).unwrap();
    let moments = integrate_fluctuation_moments(&p, &kin, &ode, GaussianLaw2::dirac(nalgebra::Vector2::zeros()), t, 1e-4).unwrap();
    let exact = moments.last().cov[(0, 0)];
    let leading = (kin.rate(s0) + p.dilution) * n0 * t;
    // The quadratic-variation rate sets the variance to first order in t.
    assert!((exact / leading - 1.0).abs() < 0.03, "{exact} vs {leading}");
    let z = z_var(&column(&ens, 1, |f| f.count), exact);
    assert!(z.abs() < 3.0, "z = {z}");
}

#[test]
fn mass_structured_model_reduces_to_crump_young() {
    let p = ChemostatParams::monod_reference(1e-7);
    let kin = Kinetics::monod_reference();
    let mk = MassKinetics::crump_young(kin.clone(), p.cell_mass, DivisionKernel::Uniform);
    let (n0, s0, horizon, reps) = (50u64, 0.003, 3.0, 10_000u64);
    let opts = SimOptions::default().with_intervals(1);
    let ibm: Vec<f64> = (0..reps)
        .map(|i| {
            let init = PopulationState::uniform(n0 as usize, p.cell_mass, s0);
            let tr = simulate_ibm(&p, &mk, init, horizon, RngStream::new(108, i), &opts).unwrap();
            tr.last().unwrap().count
        })
        .collect();
    let cy: Vec<f64> = cy_ensemble(&p, &kin, CrumpYoungState::new(n0, s0), horizon, reps, 109, 1)
        .iter()
        .map(|tr| tr.last().unwrap().count)
        .collect();
    let ((ma, va), (mb, vb)) = (mean_var(&ibm), mean_var(&cy));
    let n = reps as f64;
    let z = (ma - mb) / ((va + vb) / n).sqrt();
    assert!(z.abs() < 3.0, "mean z = {z}");
    let fourth = |xs: &[f64], m: f64| xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let se = ((fourth(&ibm, ma) - va * va) / n + (fourth(&cy, mb) - vb * vb) / n).sqrt();
    let z = (va - vb) / se;
    assert!(z.abs() < 3.0, "variance z = {z}");
}
