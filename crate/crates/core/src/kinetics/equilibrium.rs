use serde::Serialize;

use super::Kinetics;
use crate::error::{Error, Result};
use crate::params::ChemostatParams;

/// Uniform scan points on `[0, Sin]` used to bracket roots of `μ(S) = D`.
pub const ROOT_SCAN_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Washout,
    StableInterior,
    UnstableInterior,
}

/// Rest point of the chemostat ODE `dN = (μ(S) − D)N`,
/// `dS = D(Sin − S) − (k m / V) μ(S) N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    /// Population on the deterministic scale (count at `n = 1`).
    pub population: f64,
    /// Substrate concentration, g/l.
    pub substrate: f64,
    pub kind: EquilibriumKind,
    /// `(λ+, λ−)`. Interior: `(−(k/V) m μ'(S*) N*, −D)`; washout:
    /// `(μ(Sin) − D, −D)`.
    pub eigenvalues: (f64, f64),
    /// Set when `μ'(S*) = 0`: a tangency that the classification cannot
    /// resolve, reported as unstable.
    pub degenerate: bool,
}

impl Equilibrium {
    pub fn is_stable(&self) -> bool {
        self.eigenvalues.0 < 0.0 && self.eigenvalues.1 < 0.0
    }

    pub fn is_interior(&self) -> bool {
        self.kind != EquilibriumKind::Washout
    }

    /// `L = (k/V) m μ'(S*) N* = (Sin − S*) μ'(S*)`, the decay rate of the
    /// population fluctuation around an interior equilibrium.
    pub fn decay_rate(&self) -> f64 {
        -self.eigenvalues.0
    }
}

/// Washout followed by every interior root of `μ(S) = D` on `(0, Sin)`,
/// ordered by increasing substrate.
pub fn find_equilibria(kin: &Kinetics, p: &ChemostatParams) -> Result<Vec<Equilibrium>> {
    p.validate()?;
    let d = p.dilution;
    let mu_in = kin.mu(p.s_in)?;
    let mut out = vec![Equilibrium {
        population: 0.0,
        substrate: p.s_in,
        kind: EquilibriumKind::Washout,
        eigenvalues: (mu_in - d, -d),
        degenerate: mu_in == d,
    }];

    let f = |s: f64| kin.rate(s) - d;
    let grid: Vec<(f64, f64)> = (0..=ROOT_SCAN_POINTS)
        .map(|i| {
            let s = p.s_in * i as f64 / ROOT_SCAN_POINTS as f64;
            (s, f(s))
        })
        .collect();
    if let Some(&(s, _)) = grid.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "growth rate is not finite at substrate {s}"
        )));
    }

    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let ((s0, f0), (s1, f1)) = (w[0], w[1]);
        if f0 == 0.0 && s0 > 0.0 {
            roots.push(s0);
        } else if f0 * f1 < 0.0 {
            roots.push(bisect(&f, s0, s1, f0));
        }
    }

    for s_star in roots {
        let n_star = p.population_at(s_star);
        let slope = kin.rate_prime(s_star);
        let lambda_plus = -p.yield_factor() * slope * n_star;
        let degenerate = slope == 0.0;
        let kind = if !degenerate && lambda_plus < 0.0 {
            EquilibriumKind::StableInterior
        } else {
            if degenerate {
                log::warn!("tangent equilibrium at S = {s_star}: μ'(S*) = 0, classified unstable");
            }
            EquilibriumKind::UnstableInterior
        };
        out.push(Equilibrium {
            population: n_star,
            substrate: s_star,
            kind,
            eigenvalues: (lambda_plus, -d),
            degenerate,
        });
    }
    Ok(out)
}

/// Bisection down to adjacent floating-point numbers (well below 1e-12).
fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_negative = f_lo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn monod_has_one_stable_interior_root() {
        let p = ChemostatParams::monod_reference(1e-5);
        let eqs = find_equilibria(&Kinetics::monod_reference(), &p).unwrap();
        assert_eq!(eqs.len(), 2);
        assert_eq!(eqs[0].kind, EquilibriumKind::Washout);
        assert_eq!((eqs[0].population, eqs[0].substrate), (0.0, 0.003));
        // Monod washout is unstable: μ(Sin) > D.
        assert!(!eqs[0].is_stable());
        let e = eqs[1];
        assert_eq!(e.kind, EquilibriumKind::StableInterior);
        assert!((e.substrate - 0.002 / 0.85).abs() < 1e-12);
        assert!(e.eigenvalues.0 < 0.0 && e.eigenvalues.1 == -0.5);
    }

    #[test]
    fn haldane_has_two_interior_roots() {
        let p = ChemostatParams::haldane_reference(1e-9);
        let eqs = find_equilibria(&Kinetics::haldane_reference(), &p).unwrap();
        assert_eq!(eqs.len(), 3);
        assert!(eqs[0].is_stable(), "Haldane washout is stable when μ(Sin) < D");
        let (stable, saddle) = (eqs[1], eqs[2]);
        assert_eq!(stable.kind, EquilibriumKind::StableInterior);
        assert_eq!(saddle.kind, EquilibriumKind::UnstableInterior);
        assert!((stable.substrate - 0.002_440_532_323_881).abs() < 1e-9);
        assert!((saddle.substrate - 0.065_559_467_676_12).abs() < 1e-9);
        assert!((saddle.population - 200.251_753_564_478).abs() < 1e-6);
        assert!(saddle.eigenvalues.0 > 0.0);
    }

    #[test]
    fn zero_growth_leaves_only_washout() {
        let p = ChemostatParams::monod_reference(1e-6);
        let eqs = find_equilibria(&Kinetics::zero(p.s_in), &p).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].kind, EquilibriumKind::Washout);
    }

    #[test]
    fn flat_tangency_is_flagged() {
        let p = ChemostatParams::monod_reference(1e-6);
        // μ touches D on a plateau starting exactly on a grid point.
        let s_grid = p.s_in * 5000.0 / ROOT_SCAN_POINTS as f64;
        let k = Kinetics::custom(vec![0.0, s_grid, p.s_in], vec![0.0, 0.5, 0.5]).unwrap();
        let eqs = find_equilibria(&k, &p).unwrap();
        let flagged: Vec<_> = eqs.iter().filter(|e| e.is_interior() && e.degenerate).collect();
        assert!(!flagged.is_empty());
        assert!(flagged.iter().all(|e| e.kind == EquilibriumKind::UnstableInterior));
    }

    proptest! {
        #[test]
        fn monod_interior_root_is_accurate(
            mu_max in 0.6f64..3.0,
            half in 1e-4f64..1e-2,
            d in 0.05f64..0.55,
            s_in in 1e-3f64..0.1,
            vol in 1e-9f64..1e-4,
        ) {
            let k = Kinetics::monod(mu_max, half).unwrap();
            let p = ChemostatParams { dilution: d, s_in, volume: vol, ..ChemostatParams::monod_reference(1.0) };
            prop_assume!(k.rate(s_in) > d * (1.0 + 1e-6));
            let eqs = find_equilibria(&k, &p).unwrap();
            prop_assert_eq!(eqs.len(), 2);
            let e = eqs[1];
            prop_assert_eq!(e.kind, EquilibriumKind::StableInterior);
            prop_assert!((k.rate(e.substrate) - d).abs() <= 1e-10);
            let n = vol / (p.stoichiometry * p.cell_mass) * (s_in - e.substrate);
            prop_assert!((e.population - n).abs() <= 1e-10 * e.population);
        }
    }
}
