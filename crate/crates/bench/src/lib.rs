//! Shared instance builders for the benchmarks.

use qubotrack_core::pipeline::{generate_scenario, Scenario, ScenarioParams};
use qubotrack_core::qubo::{apply_penalties, build_cost, ConstraintSystem, Qubo};

/// The standard synthetic shape: 3 detections over 5 frames, 4 real tracks,
/// frame gap 3 (100 binary variables).
pub fn standard_scenario(sigma: f64, seed: u64) -> Scenario {
    generate_scenario(&ScenarioParams {
        num_objects: 3,
        num_frames: 5,
        sigma,
        seed,
        max_frame_gap: 3,
        ..ScenarioParams::default()
    })
    .expect("valid parameters")
}

/// Penalized QUBO of the standard scenario with a uniform multiplier.
pub fn penalized_qubo(sigma: f64, seed: u64, lambda: f64) -> Qubo {
    let scenario = standard_scenario(sigma, seed);
    let cost = build_cost(&scenario.spec);
    let constraints = ConstraintSystem::for_spec(&scenario.spec).with_uniform_multiplier(lambda);
    apply_penalties(&cost, &constraints).expect("dimensions agree")
}

/// A small penalized instance under the exhaustive cap (20 variables).
pub fn small_qubo(seed: u64) -> Qubo {
    let scenario = generate_scenario(&ScenarioParams {
        num_objects: 1,
        num_frames: 2,
        sigma: 0.4,
        seed,
        max_frame_gap: 1,
        num_real_tracks: Some(4),
        ..ScenarioParams::default()
    })
    .expect("valid parameters");
    let cost = build_cost(&scenario.spec);
    let constraints = ConstraintSystem::for_spec(&scenario.spec).with_uniform_multiplier(2.0);
    apply_penalties(&cost, &constraints).expect("dimensions agree")
}
