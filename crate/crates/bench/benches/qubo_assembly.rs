use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qubotrack_bench::standard_scenario;
use qubotrack_core::qubo::{apply_penalties, build_cost, regularize, to_spin, ConstraintSystem};

fn bench_assembly(c: &mut Criterion) {
    let scenario = standard_scenario(0.6, 1);
    let spec = &scenario.spec;

    c.bench_function("build_cost/100vars", |b| {
        b.iter(|| build_cost(black_box(spec)))
    });

    let cost = build_cost(spec);
    let constraints = ConstraintSystem::for_spec(spec).with_uniform_multiplier(3.0);
    c.bench_function("apply_penalties/100vars", |b| {
        b.iter(|| apply_penalties(black_box(&cost), black_box(&constraints)).unwrap())
    });

    let penalized = apply_penalties(&cost, &constraints).unwrap();
    c.bench_function("regularize/100vars", |b| {
        b.iter(|| regularize(black_box(&penalized), black_box(spec), 1.5).unwrap())
    });

    c.bench_function("to_spin/100vars", |b| {
        b.iter(|| to_spin(black_box(&penalized)))
    });

    let state: Vec<bool> = (0..penalized.num_variables()).map(|i| i % 7 == 0).collect();
    c.bench_function("energy/100vars", |b| {
        b.iter(|| penalized.energy(black_box(&state)).unwrap())
    });
}

criterion_group!(benches, bench_assembly);
criterion_main!(benches);
