//! Cost of one replicate over 10 h: exact jump simulation against the two
//! diffusion approximations, per population size.

use std::hint::black_box;

use chemostat::deterministic::{integrate_chemostat_ode, OdeState2};
use chemostat::exact::{simulate_crump_young, CrumpYoungState, SimOptions};
use chemostat::sde::{integrate_feller, FellerState, HatPlan, HatState, SdeOptions};
use chemostat::{Kinetics, RngStream};
use chemostat_bench::{SIZES, S0};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const HORIZON: f64 = 10.0;

fn replicate_cost(c: &mut Criterion) {
    let kin = Kinetics::monod_reference();
    let mut group = c.benchmark_group("replicate_10h");
    group.sample_size(20);
    for size in SIZES {
        let p = size.params();
        let n0 = size.population as f64;
        let exact = SimOptions::default();
        let sde = SdeOptions::default();
        let mut stream = 0;
        group.bench_function(BenchmarkId::new("crump_young", size.label), |b| {
            b.iter(|| {
                stream += 1;
                let init = CrumpYoungState::new(size.population, S0);
                black_box(simulate_crump_young(&p, &kin, init, HORIZON, RngStream::new(1, stream), &exact).unwrap())
            })
        });
        let ode = integrate_chemostat_ode(&p, &kin, OdeState2::new(n0, S0), HORIZON, sde.dt).unwrap();
        let plan = HatPlan::new(&p, &kin, &ode, HORIZON, &sde).unwrap();
        group.bench_function(BenchmarkId::new("sde_hat", size.label), |b| {
            b.iter(|| {
                stream += 1;
                black_box(plan.sample(HatState::new(n0, S0), RngStream::new(2, stream)))
            })
        });
        group.bench_function(BenchmarkId::new("sde_feller", size.label), |b| {
            b.iter(|| {
                stream += 1;
                let init = FellerState::new(n0, S0);
                black_box(integrate_feller(&p, &kin, init, HORIZON, RngStream::new(3, stream), &sde).unwrap())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, replicate_cost);
criterion_main!(benches);
