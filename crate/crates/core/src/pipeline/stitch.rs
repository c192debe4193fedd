//! Track identity matching across neighboring segments via a linear-sum
//! assignment on shared overlap detections.

use std::collections::HashSet;
use std::ops::Range;

use super::hungarian::hungarian_max;

/// Default profit for track pairs that share no overlap detection; any
/// negative value keeps them unmatched.
pub const DEFAULT_NO_OVERLAP_VALUE: f64 = -0.5;

/// Matches tracks of a previous segment to tracks of the next one. Both
/// sides are given as per-track detection lists in global `(frame,
/// detection)` coordinates; only detections inside `overlap` count. Returns,
/// for every next-side track, the matched previous-side track index or
/// `None` for a fresh identity.
pub fn stitch(
    prev_tracks: &[Vec<(usize, usize)>],
    next_tracks: &[Vec<(usize, usize)>],
    overlap: Range<usize>,
    no_overlap_value: f64,
) -> Vec<Option<usize>> {
    let prev_sets: Vec<HashSet<(usize, usize)>> = prev_tracks
        .iter()
        .map(|dets| restrict(dets, &overlap))
        .collect();
    let next_sets: Vec<HashSet<(usize, usize)>> = next_tracks
        .iter()
        .map(|dets| restrict(dets, &overlap))
        .collect();

    // Only tracks present in the overlap take part in the matching.
    let prev_idx: Vec<usize> = (0..prev_tracks.len())
        .filter(|&i| !prev_sets[i].is_empty())
        .collect();
    let next_idx: Vec<usize> = (0..next_tracks.len())
        .filter(|&j| !next_sets[j].is_empty())
        .collect();

    let mut mapping = vec![None; next_tracks.len()];
    if prev_idx.is_empty() || next_idx.is_empty() {
        return mapping;
    }

    // Square profit matrix padded with zero-profit dummy rows/columns so any
    // track can stay unmatched; shared-detection counts are the profits and
    // no-overlap pairs get a small negative value.
    let size = prev_idx.len() + next_idx.len();
    let mut profit = vec![vec![0.0f64; size]; size];
    for (a, &i) in prev_idx.iter().enumerate() {
        for (b, &j) in next_idx.iter().enumerate() {
            let shared = prev_sets[i].intersection(&next_sets[j]).count();
            profit[a][b] = if shared > 0 {
                shared as f64
            } else {
                no_overlap_value
            };
        }
    }

    let assignment = hungarian_max(&profit);
    for (a, &col) in assignment.iter().enumerate().take(prev_idx.len()) {
        if col < next_idx.len() && profit[a][col] > 0.0 {
            mapping[next_idx[col]] = Some(prev_idx[a]);
        }
    }
    mapping
}

/// Total matching objective actually achieved: the sum of shared-detection
/// counts over matched pairs. Exposed for oracle comparisons.
pub fn stitch_objective(
    prev_tracks: &[Vec<(usize, usize)>],
    next_tracks: &[Vec<(usize, usize)>],
    overlap: Range<usize>,
    mapping: &[Option<usize>],
) -> usize {
    let mut total = 0;
    for (j, matched) in mapping.iter().enumerate() {
        if let Some(i) = matched {
            let prev = restrict(&prev_tracks[*i], &overlap);
            let next = restrict(&next_tracks[j], &overlap);
            total += prev.intersection(&next).count();
        }
    }
    total
}

fn restrict(dets: &[(usize, usize)], overlap: &Range<usize>) -> HashSet<(usize, usize)> {
    dets.iter()
        .copied()
        .filter(|&(f, _)| overlap.contains(&f))
        .collect()
}
