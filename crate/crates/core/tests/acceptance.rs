//! Acceptance suite. Each criterion is one test that prints a pass line with
//! its measured numbers (visible with `--nocapture`); a failed assertion is
//! the fail line. Every tolerance is pinned here, not configured elsewhere.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qubotrack_core::lagrangian::{optimize_multipliers, MultiplierConfig};
use qubotrack_core::model::{check_feasibility, decode};
use qubotrack_core::pipeline::reference::{assignment_of_patterns, enumerate_patterns};
use qubotrack_core::pipeline::{
    best_feasible_assignment, enumerate_feasible_assignments, evaluate, generate_scenario,
    lambda_sweep, stitch, stitch_objective, track, ReferenceKind, ScenarioParams, SolverBackend,
    SweepConfig, SweepMode, TrackConfig,
};
use qubotrack_core::qubo::{apply_penalties, build_cost, regularize, to_spin, ConstraintSystem, Qubo};
use qubotrack_core::sampler::{
    anneal, AnnealSchedule, Annealer, BruteForce, Sampler,
};

fn random_qubo(rng: &mut StdRng, n: usize) -> Qubo {
    let mut qubo = Qubo::new(n);
    for i in 0..n {
        qubo.add_linear(i, rng.random_range(-1.0..1.0));
        for j in (i + 1)..n {
            if rng.random_bool(0.4) {
                qubo.add_quadratic(i, j, rng.random_range(-1.0..1.0));
            }
        }
    }
    qubo.add_offset(rng.random_range(-0.5..0.5));
    qubo
}

/// Independent dense evaluator: symmetric matrix plus linear plus offset,
/// assembled and evaluated without touching the Qubo energy path.
struct DenseOracle {
    n: usize,
    matrix: Vec<Vec<f64>>,
    linear: Vec<f64>,
    offset: f64,
}

impl DenseOracle {
    fn of(qubo: &Qubo) -> DenseOracle {
        let n = qubo.num_variables();
        let mut matrix = vec![vec![0.0; n]; n];
        let mut linear = qubo.linear().to_vec();
        for (&(i, j), &v) in qubo.quadratic() {
            if i == j {
                linear[i] += v;
            } else {
                matrix[i][j] += v / 2.0;
                matrix[j][i] += v / 2.0;
            }
        }
        DenseOracle {
            n,
            matrix,
            linear,
            offset: qubo.offset(),
        }
    }

    fn energy(&self, state: &[bool]) -> f64 {
        let z: Vec<f64> = state.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let mut e = self.offset;
        for i in 0..self.n {
            e += self.linear[i] * z[i];
            for j in 0..self.n {
                e += z[i] * self.matrix[i][j] * z[j];
            }
        }
        e
    }

    fn minimum(&self) -> f64 {
        let mut best = f64::INFINITY;
        let mut state = vec![false; self.n];
        loop {
            best = best.min(self.energy(&state));
            if !advance(&mut state) {
                break;
            }
        }
        best
    }
}

fn advance(state: &mut [bool]) -> bool {
    for bit in state.iter_mut() {
        *bit = !*bit;
        if *bit {
            return true;
        }
    }
    false
}

/// Criterion 1: over 100 random instances with n <= 16, the exhaustive
/// backend agrees with an independent dense evaluator, and the annealer's
/// best of 1024 reads hits the exact minimum on at least 95 instances.
#[test]
fn criterion_1_oracle_equivalence() {
    let mut rng = StdRng::seed_from_u64(101);
    let mut anneal_hits = 0;
    for instance in 0..100u64 {
        let n = rng.random_range(8..=16);
        let qubo = random_qubo(&mut rng, n);
        let oracle = DenseOracle::of(&qubo);

        let brute = BruteForce::default().sample(&qubo).unwrap();
        for s in brute.samples() {
            assert!(
                (s.energy - oracle.energy(&s.state)).abs() <= 1e-9,
                "instance {instance}: exhaustive energy disagrees with the dense oracle"
            );
        }
        let exact_min = oracle.minimum();
        assert!(
            (brute.best_energy().unwrap() - exact_min).abs() <= 1e-9,
            "instance {instance}: exhaustive minimum {} vs oracle {exact_min}",
            brute.best_energy().unwrap()
        );

        let schedule = AnnealSchedule {
            sweeps: 50,
            reads: 1024,
            seed: instance,
            ..AnnealSchedule::default()
        };
        let annealed = anneal(&qubo, &schedule).unwrap();
        if (annealed.best_energy().unwrap() - exact_min).abs() <= 1e-9 {
            anneal_hits += 1;
        }
    }
    assert!(
        anneal_hits >= 95,
        "annealer matched the exact minimum on only {anneal_hits}/100 instances"
    );
    println!(
        "criterion 1 (oracle equivalence): PASS - exhaustive agreed 100/100, anneal best-of-1024 matched {anneal_hits}/100"
    );
}

/// Criterion 2: spin conversion is exact state by state for 50 random
/// problems with n <= 14.
#[test]
fn criterion_2_spin_conversion_exactness() {
    let mut rng = StdRng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(6..=14);
        let qubo = random_qubo(&mut rng, n);
        let ising = to_spin(&qubo);
        let mut state = vec![false; n];
        loop {
            let eb = qubo.energy(&state).unwrap();
            let es = ising.energy(&state).unwrap();
            worst = worst.max((eb - es).abs());
            assert!(
                (eb - es).abs() <= 1e-9,
                "binary {eb} vs spin {es} on {state:?}"
            );
            if !advance(&mut state) {
                break;
            }
        }
    }
    println!(
        "criterion 2 (spin-conversion exactness): PASS - max |binary - spin| = {worst:.3e} over 50 full enumerations"
    );
}

/// Criterion 3: diagonal regularization shifts every feasible assignment by
/// exactly e*F*(T-1) and never moves the feasible argmin for e in
/// {0.5, 5, 50}.
#[test]
fn criterion_3_regularization_neutrality() {
    let mut rng = StdRng::seed_from_u64(303);

    // Shift identity over 100 random feasible assignments on random specs.
    let mut checked = 0;
    while checked < 100 {
        let frames = rng.random_range(1..=3);
        let dets = rng.random_range(1..=3);
        let tracks = rng.random_range(1..=3);
        let gap = rng.random_range(1..=2);
        let mut spec =
            qubotrack_core::ProblemSpec::new(frames, dets, tracks, gap, -0.2).unwrap();
        for i in 0..frames {
            for j in (i + 1)..frames.min(i + gap + 1) {
                for di in 0..dets {
                    for dj in 0..dets {
                        spec.set_similarity(i, di, j, dj, rng.random_range(-1.0..1.0))
                            .unwrap();
                    }
                }
            }
        }
        let qubo = build_cost(&spec);
        let e = rng.random_range(0.1..20.0);
        let reg = regularize(&qubo, &spec, e).unwrap();
        let expected = e * frames as f64 * tracks as f64;

        let patterns = enumerate_patterns(dets, tracks);
        for _ in 0..4 {
            let chosen: Vec<&_> = (0..frames)
                .map(|_| &patterns[rng.random_range(0..patterns.len())])
                .collect();
            let a = assignment_of_patterns(&chosen, &spec).unwrap();
            assert!(check_feasibility(&a, &spec).unwrap().is_feasible());
            let shift = reg.energy(a.as_state()).unwrap() - qubo.energy(a.as_state()).unwrap();
            assert!(
                (shift - expected).abs() <= 1e-9,
                "shift {shift} vs e*F*(T-1) = {expected}"
            );
            checked += 1;
        }
    }

    // Feasible argmin is invariant for the pinned e values.
    for seed in 0..10u64 {
        let scenario = generate_scenario(&ScenarioParams {
            num_objects: 2,
            num_frames: 3,
            sigma: 0.5,
            seed: 3030 + seed,
            max_frame_gap: 2,
            num_real_tracks: Some(2),
            ..ScenarioParams::default()
        })
        .unwrap();
        let spec = &scenario.spec;
        let qubo = build_cost(spec);
        let all = enumerate_feasible_assignments(spec, 1_000_000).unwrap();
        let argmin = |q: &Qubo| {
            all.iter()
                .min_by(|a, b| {
                    q.energy(a.as_state())
                        .unwrap()
                        .partial_cmp(&q.energy(b.as_state()).unwrap())
                        .unwrap()
                })
                .unwrap()
                .clone()
        };
        let base = argmin(&qubo);
        for e in [0.5, 5.0, 50.0] {
            let reg = regularize(&qubo, spec, e).unwrap();
            assert_eq!(
                argmin(&reg),
                base,
                "seed {seed}: feasible argmin moved under e = {e}"
            );
        }
    }
    println!(
        "criterion 3 (regularization neutrality): PASS - 100 shift identities within 1e-9, argmin invariant for e in {{0.5, 5, 50}} on 10 instances"
    );
}

fn standard_synthetic(frames: usize, sigma: f64, seed: u64) -> qubotrack_core::ProblemSpec {
    generate_scenario(&ScenarioParams {
        num_objects: 3,
        num_frames: frames,
        sigma,
        seed,
        max_frame_gap: 3,
        ..ScenarioParams::default()
    })
    .unwrap()
    .spec
}

/// Criterion 4, exact tier: instances of the same constraint family at
/// exhaustively checkable size (n <= 24). The multiplier loop must converge
/// and the exact minimizer of the penalized QUBO must be feasible, 20/20.
///
/// The full 3-detections/4-tracks setup spans 80-100 binary variables, where
/// no exhaustive check is possible (2^80 states); the stated-dimension check
/// lives in `criterion_4_constraint_satisfaction_full_scale`.
#[test]
fn criterion_4_constraint_satisfaction_exact_tier() {
    let sigmas = [0.0, 0.2, 0.6];
    let mut done = 0;
    for instance in 0..20u64 {
        let sigma = sigmas[(instance % 3) as usize];
        // 2 frames, 2 real detections, 2-3 real tracks: 18 or 24 variables.
        let tracks = 2 + (instance % 2) as usize;
        let scenario = generate_scenario(&ScenarioParams {
            num_objects: 2,
            num_frames: 2,
            sigma,
            seed: 4000 + instance,
            max_frame_gap: 1,
            num_real_tracks: Some(tracks),
            ..ScenarioParams::default()
        })
        .unwrap();
        let spec = &scenario.spec;
        assert!(spec.num_variables() <= 24);

        let cost = build_cost(spec);
        let constraints = ConstraintSystem::for_spec(spec);
        let solver = BruteForce::default();
        let state =
            optimize_multipliers(&cost, &constraints, &solver, &MultiplierConfig::default())
                .unwrap();
        assert!(state.converged, "instance {instance} (sigma {sigma}) did not converge");

        let penalized = apply_penalties(&cost, &state.apply(&constraints).unwrap()).unwrap();
        let best = solver.sample(&penalized).unwrap();
        assert!(
            constraints.is_feasible(&best.best().unwrap().state),
            "instance {instance} (sigma {sigma}): exact minimizer infeasible"
        );
        done += 1;
    }
    println!(
        "criterion 4a (constraint satisfaction, exact tier n<=24): PASS - {done}/20 converged with feasible exact minimizers"
    );
}

/// Criterion 4 at the stated dimensions (3 detections, 4-5 frames, 4 tracks,
/// frame gap 3; 80-100 variables). Exhaustive verification is impossible at
/// this size, so the exact check is substituted: the optimized penalized
/// problem is sampled hard (2048 reads) and its best state must be feasible
/// and sit exactly at the independently computed best feasible energy.
#[test]
fn criterion_4_constraint_satisfaction_full_scale() {
    let sigmas = [0.0, 0.2, 0.6];
    let mut done = 0;
    for instance in 0..20u64 {
        let sigma = sigmas[(instance % 3) as usize];
        let frames = 4 + (instance % 2) as usize;
        let spec = standard_synthetic(frames, sigma, 4400 + instance);
        let cost = build_cost(&spec);
        let constraints = ConstraintSystem::for_spec(&spec);

        // 4-frame instances take the base value 1.0, 5-frame ones 0.5.
        let config = MultiplierConfig {
            lambda_base: if frames == 4 { 1.0 } else { 0.5 },
            ..MultiplierConfig::default()
        };
        let solver = Annealer::new(AnnealSchedule {
            sweeps: 100,
            reads: 256,
            seed: 44_000 + instance,
            ..AnnealSchedule::default()
        });
        let state = optimize_multipliers(&cost, &constraints, &solver, &config).unwrap();
        assert!(
            state.converged,
            "instance {instance} (sigma {sigma}, {frames} frames) did not converge"
        );

        let penalized = apply_penalties(&cost, &state.apply(&constraints).unwrap()).unwrap();
        let verify = anneal(
            &penalized,
            &AnnealSchedule {
                sweeps: 100,
                reads: 2048,
                seed: 44_500 + instance,
                ..AnnealSchedule::default()
            },
        )
        .unwrap();
        let best = verify.best().unwrap();
        assert!(
            constraints.is_feasible(&best.state),
            "instance {instance} (sigma {sigma}): sampled minimizer infeasible"
        );
        let (reference, _) = best_feasible_assignment(&spec, 1 << 22).unwrap();
        let reference_energy = penalized.energy(reference.as_state()).unwrap();
        assert!(
            (best.energy - reference_energy).abs() <= 1e-9,
            "instance {instance} (sigma {sigma}): best sample {} vs feasible optimum {reference_energy}",
            best.energy
        );
        done += 1;
    }
    println!(
        "criterion 4b (constraint satisfaction, stated dimensions): PASS - {done}/20 converged; best samples feasible at the exact feasible optimum"
    );
}

/// Criterion 5: at sigma = 0.6 with 4096 reads per setting, the optimized
/// multipliers beat the best fixed multiplier from [2, 5], and their
/// probability curve stays within 50% of its peak over an offset interval of
/// length >= 1.
#[test]
fn criterion_5_sweep_qualitative_reproduction() {
    let scenario = generate_scenario(&ScenarioParams {
        num_objects: 3,
        num_frames: 5,
        sigma: 0.6,
        seed: 55,
        max_frame_gap: 3,
        ..ScenarioParams::default()
    })
    .unwrap();

    // 4096 reads per setting are pinned by the criterion; the per-read sweep
    // count is an annealer quality knob (3000 keeps the runtime in budget).
    let fixed = lambda_sweep(
        &scenario,
        &SweepConfig {
            mode: SweepMode::Fixed,
            values: (0..=6).map(|i| 2.0 + 0.5 * i as f64).collect(),
            reads: 4096,
            sweeps: 3000,
            seed: 505,
            ..SweepConfig::default()
        },
    )
    .unwrap();
    assert_eq!(fixed.reference, ReferenceKind::FeasibleOptimum);
    let fixed_peak = fixed
        .rows
        .iter()
        .map(|r| r.solution_probability)
        .fold(0.0f64, f64::max);

    let offsets: Vec<f64> = (0..=8).map(|i| 0.25 * i as f64).collect();
    let optimized = lambda_sweep(
        &scenario,
        &SweepConfig {
            mode: SweepMode::Optimized,
            values: offsets.clone(),
            reads: 4096,
            sweeps: 3000,
            seed: 506,
            optimize_reads: 512,
            multipliers: MultiplierConfig {
                lambda_base: 0.5,
                ..MultiplierConfig::default()
            },
            ..SweepConfig::default()
        },
    )
    .unwrap();
    assert!(optimized.multiplier_state.as_ref().unwrap().converged);
    let probabilities: Vec<f64> = optimized
        .rows
        .iter()
        .map(|r| r.solution_probability)
        .collect();
    let optimized_peak = probabilities.iter().copied().fold(0.0f64, f64::max);

    assert!(
        optimized_peak >= fixed_peak,
        "optimized peak {optimized_peak} below fixed peak {fixed_peak}"
    );

    // Longest contiguous offset interval staying within 50% of the peak.
    let threshold = optimized_peak / 2.0;
    let mut longest = 0.0f64;
    let mut start: Option<usize> = None;
    for (i, &p) in probabilities.iter().enumerate() {
        if p >= threshold {
            if start.is_none() {
                start = Some(i);
            }
            let s = start.unwrap();
            longest = longest.max(offsets[i] - offsets[s]);
        } else {
            start = None;
        }
    }
    assert!(
        longest >= 1.0,
        "optimized curve stays within 50% of its peak only over {longest} of offset range"
    );
    println!(
        "criterion 5 (sweep qualitative reproduction): PASS - optimized peak {optimized_peak:.4} >= fixed peak {fixed_peak:.4}; 50%-of-peak interval length {longest:.2} >= 1"
    );
}

/// Criterion 6: noiseless tracking of 3 objects over 20 frames in segments
/// of 5 with overlap 3 recovers every detection with zero identity switches,
/// across 20 seeds.
#[test]
fn criterion_6_noiseless_end_to_end_tracking() {
    for seed in 0..20u64 {
        let scenario = generate_scenario(&ScenarioParams {
            num_objects: 3,
            num_frames: 20,
            sigma: 0.0,
            seed: 600 + seed,
            max_frame_gap: 3,
            ..ScenarioParams::default()
        })
        .unwrap();
        let config = TrackConfig {
            segment_length: 5,
            overlap: Some(3),
            backend: SolverBackend::Anneal,
            reads: 256,
            sweeps: 100,
            seed,
            ..TrackConfig::default()
        };
        let tracks = track(&scenario.spec, &config).unwrap();
        let metrics = evaluate(&tracks, &scenario).unwrap();
        assert_eq!(
            metrics.detection_accuracy, 1.0,
            "seed {seed}: accuracy {} below 1.0",
            metrics.detection_accuracy
        );
        assert_eq!(
            metrics.id_switches, 0,
            "seed {seed}: {} identity switches",
            metrics.id_switches
        );
    }
    println!(
        "criterion 6 (noiseless end-to-end tracking): PASS - 20/20 seeds at accuracy 1.0 with 0 identity switches"
    );
}

/// Criterion 7: the linear-sum stitcher equals exhaustive maximization over
/// all partial injections for 200 random boundaries with up to 6 tracks per
/// side.
#[test]
fn criterion_7_stitching_oracle() {
    let mut rng = StdRng::seed_from_u64(707);
    for boundary in 0..200u64 {
        let prev_count = rng.random_range(1..=6);
        let next_count = rng.random_range(1..=6);
        let overlap = 10..13usize;
        let dets_per_frame = 4usize;

        let random_tracks = |rng: &mut StdRng, count: usize| -> Vec<Vec<(usize, usize)>> {
            (0..count)
                .map(|_| {
                    let mut dets = Vec::new();
                    for frame in 8..15 {
                        if rng.random_bool(0.6) {
                            dets.push((frame, rng.random_range(0..dets_per_frame)));
                        }
                    }
                    dets
                })
                .collect()
        };
        let prev = random_tracks(&mut rng, prev_count);
        let next = random_tracks(&mut rng, next_count);

        let mapping = stitch(&prev, &next, overlap.clone(), -0.5);
        let achieved = stitch_objective(&prev, &next, overlap.clone(), &mapping) as f64;

        // Exhaustive maximum over partial injections of next tracks onto
        // prev tracks, scoring shared overlap detections.
        let shared = |i: usize, j: usize| -> f64 {
            let in_overlap = |dets: &[(usize, usize)]| {
                dets.iter()
                    .copied()
                    .filter(|&(f, _)| overlap.contains(&f))
                    .collect::<std::collections::HashSet<_>>()
            };
            let count = in_overlap(&prev[i]).intersection(&in_overlap(&next[j])).count();
            if count > 0 {
                count as f64
            } else {
                -0.5
            }
        };
        fn explore(
            j: usize,
            next_count: usize,
            used: &mut Vec<bool>,
            shared: &dyn Fn(usize, usize) -> f64,
            current: f64,
            best: &mut f64,
        ) {
            if j == next_count {
                *best = best.max(current);
                return;
            }
            explore(j + 1, next_count, used, shared, current, best);
            for i in 0..used.len() {
                if !used[i] {
                    used[i] = true;
                    explore(j + 1, next_count, used, shared, current + shared(i, j), best);
                    used[i] = false;
                }
            }
        }
        let mut best = f64::NEG_INFINITY;
        let mut used = vec![false; prev_count];
        explore(0, next_count, &mut used, &|i, j| shared(i, j), 0.0, &mut best);

        assert!(
            (achieved - best).abs() <= 1e-9,
            "boundary {boundary}: matcher objective {achieved} vs exhaustive {best}"
        );
    }
    println!(
        "criterion 7 (stitching oracle): PASS - matcher equals exhaustive partial-injection maximum on 200/200 boundaries"
    );
}

/// Criterion 8: the benchmark-scale results that need external detection
/// features, a commercial solver, or quantum hardware are documented as out
/// of scope in the README rather than claimed.
#[test]
fn criterion_8_out_of_scope_documented() {
    let readme = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../README.md"
    ))
    .expect("README.md exists at the workspace root")
    .to_lowercase();
    for needle in ["mot15", "out of scope", "quantum hardware"] {
        assert!(
            readme.contains(needle),
            "README must document '{needle}' in its scope section"
        );
    }
    println!("criterion 8 (out-of-scope documentation): PASS - README states the desk-scale limits");
}

/// The decoded minimizer of a small penalized instance is the ground-truth
/// assignment (supporting check reused by several criteria above).
#[test]
fn penalized_minimizer_decodes_to_ground_truth() {
    let scenario = generate_scenario(&ScenarioParams {
        num_objects: 2,
        num_frames: 2,
        sigma: 0.0,
        seed: 9,
        max_frame_gap: 1,
        num_real_tracks: Some(2),
        ..ScenarioParams::default()
    })
    .unwrap();
    let spec = &scenario.spec;
    let cost = build_cost(spec);
    let constraints = ConstraintSystem::for_spec(spec);
    let solver = BruteForce::default();
    let state =
        optimize_multipliers(&cost, &constraints, &solver, &MultiplierConfig::default()).unwrap();
    let penalized = apply_penalties(&cost, &state.apply(&constraints).unwrap()).unwrap();
    let best = solver.sample(&penalized).unwrap();
    let (assignment, report) = decode(&best.best().unwrap().state, spec).unwrap();
    assert!(report.is_feasible());

    // Same-object detections share a track in every frame pair.
    for f in 0..2usize {
        for d in 0..2usize {
            assert!(assignment.track_of(f, d).is_some());
        }
    }
    let object_of = |f: usize, d: usize| scenario.ground_truth[f][d];
    for d0 in 0..2usize {
        for d1 in 0..2usize {
            let same_object = object_of(0, d0) == object_of(1, d1);
            let same_track = assignment.track_of(0, d0) == assignment.track_of(1, d1);
            assert_eq!(same_object, same_track);
        }
    }
}
