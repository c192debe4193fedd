use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qubotrack_bench::standard_scenario;
use qubotrack_core::pipeline::{
    best_feasible_assignment, generate_scenario, segment, track, ScenarioParams, SolverBackend,
    TrackConfig,
};

fn bench_pipeline(c: &mut Criterion) {
    let scenario = standard_scenario(0.6, 5);

    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);

    group.bench_function("feasible_reference/5frames", |b| {
        b.iter(|| best_feasible_assignment(black_box(&scenario.spec), 1 << 22).unwrap())
    });

    let long = generate_scenario(&ScenarioParams {
        num_objects: 3,
        num_frames: 20,
        sigma: 0.0,
        seed: 2,
        max_frame_gap: 3,
        ..ScenarioParams::default()
    })
    .unwrap();
    group.bench_function("segment/20frames", |b| {
        b.iter(|| segment(black_box(&long.spec), 5, 3).unwrap())
    });

    group.bench_function("track/20frames_noiseless", |b| {
        let config = TrackConfig {
            segment_length: 5,
            overlap: Some(3),
            backend: SolverBackend::Anneal,
            reads: 64,
            sweeps: 100,
            seed: 9,
            ..TrackConfig::default()
        };
        b.iter(|| track(black_box(&long.spec), black_box(&config)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);
