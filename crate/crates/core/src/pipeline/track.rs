//! End-to-end tracking: segment the instance, build and penalize each
//! segment's QUBO, solve, decode the best feasible sample, stitch track
//! identities across overlaps, and split tracks with over-long gaps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::segmenting::{segment, SegmentSpec};
use super::stitch::{stitch, DEFAULT_NO_OVERLAP_VALUE};
use crate::error::{Error, Result};
use crate::lagrangian::{
    fallback_multipliers, optimize_multipliers, MultiplierConfig, MultiplierState,
};
use crate::model::ProblemSpec;
use crate::qubo::{apply_penalties, build_cost, regularize, ConstraintSystem, Qubo};
use crate::sampler::{
    derive_seed, solution_probability, AnnealSchedule, BruteForce, SampleSet, Sampler,
};

/// Which solver runs each segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverBackend {
    /// Exhaustive for instances under the brute-force cap, annealing above.
    Auto,
    Anneal,
    Brute,
}

/// Configuration of the full tracking pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackConfig {
    pub segment_length: usize,
    /// Shared frames between consecutive segments; defaults to the spec's
    /// maximum frame gap.
    pub overlap: Option<usize>,
    pub backend: SolverBackend,
    pub reads: u32,
    pub sweeps: u32,
    pub seed: u64,
    /// Adaptive multiplier estimation; when `false` a uniform
    /// `fixed_lambda` is used instead.
    pub optimize_lambda: bool,
    pub fixed_lambda: f64,
    pub multipliers: MultiplierConfig,
    /// Diagonal regularization constant; zero disables it.
    pub regularization: f64,
    pub stitch_no_overlap_value: f64,
    pub brute_cap: usize,
}

impl Default for TrackConfig {
    fn default() -> Self {
        TrackConfig {
            segment_length: 5,
            overlap: None,
            backend: SolverBackend::Auto,
            reads: 512,
            sweeps: 200,
            seed: 0,
            optimize_lambda: true,
            fixed_lambda: 3.0,
            multipliers: MultiplierConfig::default(),
            regularization: 0.0,
            stitch_no_overlap_value: DEFAULT_NO_OVERLAP_VALUE,
            brute_cap: 24,
        }
    }
}

/// Outcome of one solved segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub index: usize,
    pub start_frame: usize,
    pub end_frame: usize,
    pub best_energy: f64,
    /// Fraction of reads at or below the selected sample's energy.
    pub solution_probability: f64,
    /// The selected sample came from the greedy single-flip repair pass
    /// rather than directly from the sampler.
    pub repaired: bool,
    pub multiplier_converged: bool,
    /// Local real-track index per (local frame, real detection); `None`
    /// marks a detection labeled as false positive.
    pub assignment: Vec<Vec<Option<usize>>>,
}

/// Identity mapping applied at one segment boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StitchRecord {
    /// Index of the right-hand segment.
    pub segment: usize,
    /// `(global track id, local track of the right segment)` pairs.
    pub matched: Vec<(u64, usize)>,
    /// Local tracks of the right segment that received fresh ids.
    pub fresh: Vec<usize>,
}

/// Reconstructed tracks: a global track id per real detection, the raw
/// per-segment solves, and the stitch records.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSet {
    /// `assignments[frame][detection]` is the global track id or `None` for
    /// detections labeled as false positives.
    pub assignments: Vec<Vec<Option<u64>>>,
    pub segments: Vec<SegmentReport>,
    pub stitches: Vec<StitchRecord>,
    pub num_tracks: u64,
}

impl TrackSet {
    /// Detections `(frame, detection)` of every global track.
    pub fn track_detections(&self) -> std::collections::BTreeMap<u64, Vec<(usize, usize)>> {
        let mut map: std::collections::BTreeMap<u64, Vec<(usize, usize)>> =
            std::collections::BTreeMap::new();
        for (frame, row) in self.assignments.iter().enumerate() {
            for (det, id) in row.iter().enumerate() {
                if let Some(id) = id {
                    map.entry(*id).or_default().push((frame, det));
                }
            }
        }
        map
    }
}

/// Runs the full pipeline on a problem instance.
pub fn track(spec: &ProblemSpec, config: &TrackConfig) -> Result<TrackSet> {
    let overlap = config.overlap.unwrap_or(spec.max_frame_gap());
    let segments = segment(spec, config.segment_length, overlap)?;

    let solved: Result<Vec<(SegmentReport, SolvedSegment)>> = segments
        .par_iter()
        .enumerate()
        .map(|(index, seg)| solve_segment(index, seg, config))
        .collect();
    let solved = solved?;

    let mut reports = Vec::with_capacity(solved.len());
    let mut locals: Vec<SolvedSegment> = Vec::with_capacity(solved.len());
    for (report, local) in solved {
        reports.push(report);
        locals.push(local);
    }

    // Left-to-right identity fold over segment boundaries.
    let mut next_id: u64 = 0;
    let mut stitches = Vec::new();
    let mut assignments: Vec<Vec<Option<u64>>> =
        vec![vec![None; spec.num_real_detections()]; spec.num_frames()];
    // Global id per local track of the previous segment.
    let mut prev_ids: Vec<Option<u64>> = Vec::new();

    for (k, local) in locals.iter().enumerate() {
        let mut ids: Vec<Option<u64>> = vec![None; local.tracks.len()];
        if k == 0 {
            for (t, dets) in local.tracks.iter().enumerate() {
                if !dets.is_empty() {
                    ids[t] = Some(next_id);
                    next_id += 1;
                }
            }
        } else {
            let prev = &locals[k - 1];
            let overlap_range = local.start_frame..prev.end_frame;
            let mapping = stitch(
                &prev.tracks,
                &local.tracks,
                overlap_range,
                config.stitch_no_overlap_value,
            );
            let mut matched = Vec::new();
            let mut fresh = Vec::new();
            for (t, dets) in local.tracks.iter().enumerate() {
                if dets.is_empty() {
                    continue;
                }
                match mapping[t].and_then(|prev_t| prev_ids[prev_t]) {
                    Some(id) => {
                        ids[t] = Some(id);
                        matched.push((id, t));
                    }
                    None => {
                        ids[t] = Some(next_id);
                        fresh.push(t);
                        next_id += 1;
                    }
                }
            }
            stitches.push(StitchRecord {
                segment: k,
                matched,
                fresh,
            });
        }

        // Earlier segments own the overlap frames they already wrote.
        let write_from = if k == 0 { 0 } else { locals[k - 1].end_frame };
        for (t, dets) in local.tracks.iter().enumerate() {
            if let Some(id) = ids[t] {
                for &(frame, det) in dets {
                    if frame >= write_from {
                        assignments[frame][det] = Some(id);
                    }
                }
            }
        }
        prev_ids = ids;
    }

    let (assignments, num_tracks) = split_long_gaps(assignments, spec.max_frame_gap());

    Ok(TrackSet {
        assignments,
        segments: reports,
        stitches,
        num_tracks,
    })
}

struct SolvedSegment {
    start_frame: usize,
    end_frame: usize,
    /// Global-frame detections of each local real track.
    tracks: Vec<Vec<(usize, usize)>>,
}

fn solve_segment(
    index: usize,
    seg: &SegmentSpec,
    config: &TrackConfig,
) -> Result<(SegmentReport, SolvedSegment)> {
    let spec = &seg.spec;
    let cost = build_cost(spec);
    let constraints = ConstraintSystem::for_spec(spec);
    let solver = segment_solver(config, cost.num_variables(), index);

    let (multipliers, converged) = if config.optimize_lambda {
        let state = optimize_multipliers(&cost, &constraints, solver.as_ref(), &config.multipliers)?;
        if state.converged {
            (state, true)
        } else {
            (fallback_multipliers(&cost, &constraints), false)
        }
    } else {
        let mut state = MultiplierState::new(config.fixed_lambda, constraints.len());
        state.converged = true;
        (state, true)
    };

    let mut penalized = apply_penalties(&cost, &multipliers.apply(&constraints)?)?;
    if config.regularization != 0.0 {
        penalized = regularize(&penalized, spec, config.regularization)?;
    }

    let samples = solver.sample(&penalized)?;
    let selected = select_feasible(&samples, &constraints, &penalized);
    let (state, energy, repaired) = selected.ok_or_else(|| {
        Error::Infeasible(format!(
            "segment {index} (frames {}..{}) produced no feasible sample; raise reads or multipliers",
            seg.start_frame,
            seg.end_frame()
        ))
    })?;

    let (assignment, report) = crate::model::decode(&state, spec)?;
    debug_assert!(report.is_feasible());

    let mut tracks: Vec<Vec<(usize, usize)>> = vec![Vec::new(); spec.num_real_tracks()];
    let mut local_assignment =
        vec![vec![None; spec.num_real_detections()]; spec.num_frames()];
    for (frame, row) in local_assignment.iter_mut().enumerate() {
        for (det, slot) in row.iter_mut().enumerate() {
            if let Some(track) = assignment.track_of(frame, det) {
                if track < spec.num_real_tracks() {
                    tracks[track].push((seg.start_frame + frame, det));
                    *slot = Some(track);
                }
            }
        }
    }

    Ok((
        SegmentReport {
            index,
            start_frame: seg.start_frame,
            end_frame: seg.end_frame(),
            best_energy: energy,
            solution_probability: solution_probability(&samples, energy, 1e-9),
            repaired,
            multiplier_converged: converged,
            assignment: local_assignment,
        },
        SolvedSegment {
            start_frame: seg.start_frame,
            end_frame: seg.end_frame(),
            tracks,
        },
    ))
}

fn segment_solver(config: &TrackConfig, num_variables: usize, index: usize) -> Box<dyn Sampler> {
    let use_brute = match config.backend {
        SolverBackend::Brute => true,
        SolverBackend::Anneal => false,
        SolverBackend::Auto => num_variables <= config.brute_cap,
    };
    if use_brute {
        // An explicit Brute backend over the cap surfaces the size error
        // from the sampler itself.
        Box::new(BruteForce {
            max_variables: config.brute_cap,
            ..BruteForce::default()
        })
    } else {
        Box::new(crate::sampler::Annealer::new(AnnealSchedule {
            sweeps: config.sweeps,
            initial_temperature: None,
            final_temperature: 0.05,
            reads: config.reads,
            seed: derive_seed(config.seed, index as u64),
        }))
    }
}

/// Picks the lowest-energy feasible sample, or repairs the best sample by
/// greedy single flips when every sample violates a constraint.
fn select_feasible(
    samples: &SampleSet,
    constraints: &ConstraintSystem,
    penalized: &Qubo,
) -> Option<(Vec<bool>, f64, bool)> {
    for sample in samples.samples() {
        if constraints.is_feasible(&sample.state) {
            return Some((sample.state.clone(), sample.energy, false));
        }
    }
    let best = samples.best()?;
    let repaired = repair(&best.state, constraints)?;
    let energy = penalized.energy(&repaired).ok()?;
    Some((repaired, energy, true))
}

/// Greedy repair: repeatedly applies the single flip that lowers the total
/// absolute violation the most, breaking ties by energy effect.
fn repair(state: &[bool], constraints: &ConstraintSystem) -> Option<Vec<bool>> {
    let mut current = state.to_vec();
    let mut total: f64 = constraints
        .violations(&current)
        .iter()
        .map(|v| v.abs())
        .sum();
    // Each flip changes a row sum by one, so the loop is bounded.
    for _ in 0..(state.len() * constraints.len() + 1) {
        if total == 0.0 {
            return Some(current);
        }
        let mut best: Option<(f64, usize)> = None;
        for k in 0..current.len() {
            current[k] = !current[k];
            let t: f64 = constraints
                .violations(&current)
                .iter()
                .map(|v| v.abs())
                .sum();
            current[k] = !current[k];
            if t < total && best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, k));
            }
        }
        let (t, k) = best?;
        current[k] = !current[k];
        total = t;
    }
    None
}

/// Splits global tracks whose active frames have a gap larger than the
/// modeled horizon, then renumbers ids in first-appearance order.
fn split_long_gaps(
    assignments: Vec<Vec<Option<u64>>>,
    max_frame_gap: usize,
) -> (Vec<Vec<Option<u64>>>, u64) {
    let mut out = assignments;
    // Detections per id in frame order.
    let mut by_id: std::collections::BTreeMap<u64, Vec<(usize, usize)>> =
        std::collections::BTreeMap::new();
    for (frame, row) in out.iter().enumerate() {
        for (det, id) in row.iter().enumerate() {
            if let Some(id) = id {
                by_id.entry(*id).or_default().push((frame, det));
            }
        }
    }
    let mut fresh = by_id.keys().next_back().map_or(0, |m| m + 1);
    for (_, dets) in by_id {
        // `None` keeps the original id; a value rewrites the tail after a
        // gap longer than the horizon.
        let mut replacement: Option<u64> = None;
        let mut last_frame: Option<usize> = None;
        for (frame, det) in dets {
            if last_frame.is_some_and(|lf| frame - lf > max_frame_gap) {
                replacement = Some(fresh);
                fresh += 1;
            }
            if let Some(id) = replacement {
                out[frame][det] = Some(id);
            }
            last_frame = Some(frame);
        }
    }

    // Renumber in first-appearance order for determinism.
    let mut remap: std::collections::HashMap<u64, u64> = std::collections::HashMap::new();
    let mut next: u64 = 0;
    for row in out.iter_mut() {
        for id in row.iter_mut().flatten() {
            let new = *remap.entry(*id).or_insert_with(|| {
                let v = next;
                next += 1;
                v
            });
            *id = new;
        }
    }
    (out, next)
}
