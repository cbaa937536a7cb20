use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qbtransfer::propagator::{evolve, hermitian_exponential, initial_state, TimeGrid};
use qbtransfer::protocols::SolverOptions;
use qbtransfer::{build, tune_tau, ModelConfig, SwitchProfile};

fn bench_evolve(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve_switched_cavity");
    group.sample_size(10);
    for n in [1usize, 10, 40, 80] {
        let cfg = ModelConfig::cavity(0.8, 0.05, n);
        let dec = build(&cfg, Some(SwitchProfile::interaction(8.5, 0.1).unwrap())).unwrap();
        let psi0 = initial_state(&cfg, &dec.space).unwrap();
        let grid = TimeGrid::with_defaults(30.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| evolve(black_box(&psi0), &dec, &grid).unwrap())
        });
    }
    group.finish();
}

fn bench_exponential(c: &mut Criterion) {
    let mut group = c.benchmark_group("hermitian_exponential");
    for n in [10usize, 80] {
        let cfg = ModelConfig::cavity(0.8, 0.05, n);
        let dec = build(&cfg, None).unwrap();
        let h = dec.at(1.0).matrix().clone();
        group.bench_with_input(BenchmarkId::from_parameter(h.nrows()), &h, |b, h| {
            b.iter(|| hermitian_exponential(black_box(h), 0.005))
        });
    }
    group.finish();
}

fn bench_tune_tau(c: &mut Criterion) {
    let mut group = c.benchmark_group("tune_tau");
    group.sample_size(10);
    let solver = SolverOptions::default();
    let direct = ModelConfig::direct(0.8, 0.05);
    group.bench_function("direct_alpha_0.8", |b| {
        b.iter(|| tune_tau(black_box(&direct), 0.1, &solver).unwrap())
    });
    let cavity = ModelConfig::cavity(1.0, 0.05, 10);
    group.bench_function("cavity_n10", |b| {
        b.iter(|| tune_tau(black_box(&cavity), 0.1, &solver).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_evolve, bench_exponential, bench_tune_tau);
criterion_main!(benches);
