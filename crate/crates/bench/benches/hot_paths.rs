//! Benchmarks for the hot paths of the simulator: propagator construction,
//! state evolution, quadrature projection and a single success-probability
//! evaluation at publication scale.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::f64::consts::PI;
use tavis_core::observables::default_quadrature_basis;
use tavis_core::protocol::ps_of_slice;
use tavis_core::{
    evolve_analytic, initial_state, quadrature_slice, CoherentPrep, Propagator, SystemParams,
    TargetState,
};

fn params() -> SystemParams {
    SystemParams::symmetric_resonant(1.0, 1.0).unwrap()
}

fn bench_propagator_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("propagator_build");
    for nbar in [30.0, 200.0] {
        let prep = CoherentPrep::new(nbar, 0.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(nbar), &prep, |b, prep| {
            b.iter(|| Propagator::new(params(), prep.n_max));
        });
    }
    group.finish();
}

fn bench_evolve(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve");
    for nbar in [30.0, 200.0] {
        let prep = CoherentPrep::new(nbar, 0.0).unwrap();
        let s0 = initial_state(params(), prep).unwrap();
        let prop = Propagator::new(params(), prep.n_max);
        group.bench_function(BenchmarkId::new("numeric", nbar), |b| {
            b.iter(|| prop.evolve(&s0, 7.0));
        });
        group.bench_function(BenchmarkId::new("analytic", nbar), |b| {
            b.iter(|| evolve_analytic(params(), prep, 7.0).unwrap());
        });
    }
    group.finish();
}

fn bench_quadrature_slice(c: &mut Criterion) {
    let prep = CoherentPrep::new(200.0, 0.0).unwrap();
    let basis = default_quadrature_basis(prep.n_max, 0.02).unwrap();
    let state = evolve_analytic(params(), prep, 3.0 * PI / 2.0).unwrap();
    c.bench_function("quadrature_slice/nbar_200", |b| {
        b.iter(|| quadrature_slice(&state, &basis).unwrap());
    });
}

fn bench_ps_point(c: &mut Criterion) {
    let prep = CoherentPrep::new(200.0, 0.0).unwrap();
    let basis = default_quadrature_basis(prep.n_max, 0.02).unwrap();
    let targets = [TargetState::new(PI)];
    c.bench_function("ps_point/nbar_200", |b| {
        b.iter(|| {
            let state = evolve_analytic(params(), prep, 7.0 * PI).unwrap();
            let slice = quadrature_slice(&state, &basis).unwrap();
            ps_of_slice(&slice, &targets, 0.9)
        });
    });
}

criterion_group!(
    benches,
    bench_propagator_build,
    bench_evolve,
    bench_quadrature_slice,
    bench_ps_point
);
criterion_main!(benches);
