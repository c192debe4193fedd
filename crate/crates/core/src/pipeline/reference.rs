//! Exact optimum over feasible assignments, independent of the QUBO path:
//! per-frame feasible patterns are enumerated and combined by dynamic
//! programming over a sliding window of `max_frame_gap` frames.
//!
//! This is the oracle for solution-probability references and for verifying
//! that penalized minimizers are the correct tracking solutions.

use crate::error::{Error, Result};
use crate::model::{Assignment, ProblemSpec};

/// A feasible single-frame pattern: for each real track the real detection
/// assigned to it (`None` means the track takes the dummy detection). Real
/// detections not used by any track go to the dummy track.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePattern {
    pub track_det: Vec<Option<usize>>,
    /// Count of real detections on the dummy track.
    pub fp_count: usize,
}

/// Enumerates every feasible per-frame pattern. The dummy-detection /
/// dummy-track corner stays zero; it never carries cost.
pub fn enumerate_patterns(num_real_detections: usize, num_real_tracks: usize) -> Vec<FramePattern> {
    let mut patterns = Vec::new();
    let mut track_det = vec![None; num_real_tracks];
    let mut used = vec![false; num_real_detections];
    fill(0, num_real_detections, &mut track_det, &mut used, &mut patterns);
    patterns
}

fn fill(
    track: usize,
    num_real_detections: usize,
    track_det: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    out: &mut Vec<FramePattern>,
) {
    if track == track_det.len() {
        let assigned = used.iter().filter(|&&u| u).count();
        out.push(FramePattern {
            track_det: track_det.clone(),
            fp_count: num_real_detections - assigned,
        });
        return;
    }
    track_det[track] = None;
    fill(track + 1, num_real_detections, track_det, used, out);
    for det in 0..num_real_detections {
        if !used[det] {
            used[det] = true;
            track_det[track] = Some(det);
            fill(track + 1, num_real_detections, track_det, used, out);
            track_det[track] = None;
            used[det] = false;
        }
    }
}

/// Builds the assignment matrices corresponding to per-frame patterns.
pub fn assignment_of_patterns(patterns: &[&FramePattern], spec: &ProblemSpec) -> Result<Assignment> {
    if patterns.len() != spec.num_frames() {
        return Err(Error::Dimension(format!(
            "{} patterns for {} frames",
            patterns.len(),
            spec.num_frames()
        )));
    }
    let mut assignment = Assignment::empty(spec);
    for (frame, pattern) in patterns.iter().enumerate() {
        if pattern.track_det.len() != spec.num_real_tracks() {
            return Err(Error::Dimension("pattern track count mismatch".into()));
        }
        let mut used = vec![false; spec.num_real_detections()];
        for (track, det) in pattern.track_det.iter().enumerate() {
            match det {
                Some(d) => {
                    assignment.set(frame, *d, track, true);
                    used[*d] = true;
                }
                None => assignment.set(frame, spec.dummy_detection(), track, true),
            }
        }
        for (d, &u) in used.iter().enumerate() {
            if !u {
                assignment.set(frame, d, spec.dummy_track(), true);
            }
        }
    }
    Ok(assignment)
}

/// Enumerates all feasible assignments of a small instance. Errors when the
/// combination count exceeds `cap`.
pub fn enumerate_feasible_assignments(spec: &ProblemSpec, cap: usize) -> Result<Vec<Assignment>> {
    let patterns = enumerate_patterns(spec.num_real_detections(), spec.num_real_tracks());
    let total = patterns.len().checked_pow(spec.num_frames() as u32);
    match total {
        Some(t) if t <= cap => {}
        _ => {
            return Err(Error::Size(format!(
                "{}^{} feasible assignments exceed cap {cap}",
                patterns.len(),
                spec.num_frames()
            )))
        }
    }
    let mut out = Vec::new();
    let mut chosen: Vec<&FramePattern> = Vec::with_capacity(spec.num_frames());
    enumerate_rec(&patterns, spec, &mut chosen, &mut out)?;
    Ok(out)
}

fn enumerate_rec<'a>(
    patterns: &'a [FramePattern],
    spec: &ProblemSpec,
    chosen: &mut Vec<&'a FramePattern>,
    out: &mut Vec<Assignment>,
) -> Result<()> {
    if chosen.len() == spec.num_frames() {
        out.push(assignment_of_patterns(chosen, spec)?);
        return Ok(());
    }
    for p in patterns {
        chosen.push(p);
        enumerate_rec(patterns, spec, chosen, out)?;
        chosen.pop();
    }
    Ok(())
}

/// Exact best feasible assignment and its score, via sliding-window dynamic
/// programming over per-frame patterns. Errors when the state space exceeds
/// `max_states`.
pub fn best_feasible_assignment(
    spec: &ProblemSpec,
    max_states: usize,
) -> Result<(Assignment, f64)> {
    let patterns = enumerate_patterns(spec.num_real_detections(), spec.num_real_tracks());
    let p = patterns.len();
    let frames = spec.num_frames();
    let window = spec.max_frame_gap().min(frames - 1).max(1).min(frames);

    let states = p.checked_pow(window as u32).filter(|&s| s <= max_states);
    let states = states.ok_or_else(|| {
        Error::Size(format!(
            "{p}^{window} pattern windows exceed the reference cap {max_states}"
        ))
    })?;

    // Dense similarity lookup: sim[f][g-f-1][di][dj].
    let d = spec.num_real_detections();
    let gap = spec.max_frame_gap();
    let mut sim = vec![0.0f64; frames * gap.max(1) * d * d];
    let sim_at = |f: usize, g: usize, di: usize, dj: usize| -> usize {
        ((f * gap.max(1)) + (g - f - 1)) * d * d + di * d + dj
    };
    for (key, &v) in spec.similarities() {
        sim[sim_at(key.frame_i, key.frame_j, key.det_i, key.det_j)] = v;
    }

    let beta = spec.false_positive_bonus();
    let frame_score = |pattern: &FramePattern| pattern.fp_count as f64 * beta;
    // Interaction of the patterns of two distinct frames f < g.
    let interact = |f: usize, pf: &FramePattern, g: usize, pg: &FramePattern| -> f64 {
        if g - f > gap {
            return 0.0;
        }
        let mut total = 0.0;
        for (df, dg) in pf.track_det.iter().zip(&pg.track_det) {
            if let (Some(df), Some(dg)) = (df, dg) {
                total += sim[sim_at(f, g, *df, *dg)];
            }
        }
        total
    };

    // When the whole problem fits in one window, score tuples directly.
    if frames <= window {
        let mut best_score = f64::NEG_INFINITY;
        let mut best: Vec<usize> = Vec::new();
        let mut tuple = vec![0usize; frames];
        loop {
            let mut score = 0.0;
            for f in 0..frames {
                score += frame_score(&patterns[tuple[f]]);
                for g in (f + 1)..frames {
                    score += interact(f, &patterns[tuple[f]], g, &patterns[tuple[g]]);
                }
            }
            if score > best_score {
                best_score = score;
                best = tuple.clone();
            }
            if !advance(&mut tuple, p) {
                break;
            }
        }
        let chosen: Vec<&FramePattern> = best.iter().map(|&i| &patterns[i]).collect();
        let assignment = assignment_of_patterns(&chosen, spec)?;
        return Ok((assignment, best_score));
    }

    if p > u8::MAX as usize {
        return Err(Error::Size(format!(
            "{p} per-frame patterns exceed the backpointer width"
        )));
    }

    // State id encodes the last `window` pattern choices, oldest in the low
    // digit: id = sum_k P[f-window+1+k] * p^k.
    let high = states / p;
    let per_frame: Vec<f64> = patterns.iter().map(&frame_score).collect();
    let mut score = vec![f64::NEG_INFINITY; states];
    {
        let mut tuple = vec![0usize; window];
        loop {
            let mut s = 0.0;
            for f in 0..window {
                s += per_frame[tuple[f]];
                for g in (f + 1)..window {
                    s += interact(f, &patterns[tuple[f]], g, &patterns[tuple[g]]);
                }
            }
            let mut id = 0usize;
            for k in (0..window).rev() {
                id = id * p + tuple[k];
            }
            score[id] = s;
            if !advance(&mut tuple, p) {
                break;
            }
        }
    }

    // choice[f - window][new_id] = dropped oldest pattern of the best parent.
    let mut choices: Vec<Vec<u8>> = Vec::with_capacity(frames - window);
    let mut decoded = vec![0usize; window];
    for f in window..frames {
        // inter[k][pk * p + pn] = interaction between pattern pk at frame
        // f - window + k and pattern pn at frame f.
        let inter: Vec<Vec<f64>> = (0..window)
            .map(|k| {
                let g = f - window + k;
                let mut table = vec![0.0f64; p * p];
                for (pk, pat_k) in patterns.iter().enumerate() {
                    for (pn, pat_n) in patterns.iter().enumerate() {
                        table[pk * p + pn] = interact(g, pat_k, f, pat_n);
                    }
                }
                table
            })
            .collect();

        let mut next = vec![f64::NEG_INFINITY; states];
        let mut choice = vec![0u8; states];
        for (id, &base) in score.iter().enumerate() {
            if base == f64::NEG_INFINITY {
                continue;
            }
            let mut rest = id;
            for slot in decoded.iter_mut() {
                *slot = rest % p;
                rest /= p;
            }
            // decoded[k] is the pattern of frame f - window + k.
            for pn in 0..p {
                let mut s = base + per_frame[pn];
                for (k, &pk) in decoded.iter().enumerate() {
                    s += inter[k][pk * p + pn];
                }
                let new_id = id / p + pn * high;
                if s > next[new_id] {
                    next[new_id] = s;
                    choice[new_id] = (id % p) as u8;
                }
            }
        }
        score = next;
        choices.push(choice);
    }

    let (mut best_id, best_score) = score
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, &s)| (i, s))
        .expect("nonempty state space");

    // Walk backpointers: the final id holds the last `window` frames.
    let mut pattern_ids = vec![0usize; frames];
    {
        let mut rest = best_id;
        for k in 0..window {
            pattern_ids[frames - window + k] = rest % p;
            rest /= p;
        }
    }
    for f in (window..frames).rev() {
        let dropped = choices[f - window][best_id] as usize;
        pattern_ids[f - window] = dropped;
        // Parent id: reinsert the dropped oldest digit.
        best_id = (best_id % high) * p + dropped;
    }

    let chosen: Vec<&FramePattern> = pattern_ids.iter().map(|&i| &patterns[i]).collect();
    let assignment = assignment_of_patterns(&chosen, spec)?;
    Ok((assignment, best_score))
}

fn advance(tuple: &mut [usize], base: usize) -> bool {
    for slot in tuple.iter_mut() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}
