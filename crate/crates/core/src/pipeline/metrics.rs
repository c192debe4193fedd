//! Tracking quality metrics against the synthetic ground truth.

use serde::{Deserialize, Serialize};

use super::hungarian::hungarian_max;
use super::scenario::Scenario;
use super::track::TrackSet;
use crate::error::{Error, Result};

/// Quality summary of a tracking run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Fraction of real detections assigned to the track matched with their
    /// ground-truth object (optimal object-to-track matching).
    pub detection_accuracy: f64,
    /// Identity changes along ground-truth objects across frames.
    pub id_switches: u64,
    /// Real detections labeled as false positives (dummy track).
    pub false_positive_labels: u64,
    /// Fraction of segments whose decoded partition equals the ground-truth
    /// partition restricted to the segment.
    pub exact_segment_rate: f64,
    pub total_detections: u64,
    pub num_tracks: u64,
}

/// Compares a reconstructed track set against the scenario that produced it.
pub fn evaluate(tracks: &TrackSet, scenario: &Scenario) -> Result<Metrics> {
    let frames = scenario.ground_truth.len();
    if tracks.assignments.len() != frames {
        return Err(Error::Dimension(format!(
            "{} assignment frames for {} ground-truth frames",
            tracks.assignments.len(),
            frames
        )));
    }
    let num_objects = scenario.params.num_objects;
    let total_detections = (frames * num_objects) as u64;

    // Count agreement between objects and global track ids.
    let num_ids = tracks.num_tracks as usize;
    let mut counts = vec![vec![0u64; num_ids]; num_objects];
    let mut false_positive_labels = 0u64;
    for (frame, row) in tracks.assignments.iter().enumerate() {
        if row.len() != num_objects {
            return Err(Error::Dimension(format!(
                "frame {frame} has {} detections, expected {num_objects}",
                row.len()
            )));
        }
        for (det, id) in row.iter().enumerate() {
            let object = scenario.ground_truth[frame][det];
            match id {
                Some(id) => counts[object][*id as usize] += 1,
                None => false_positive_labels += 1,
            }
        }
    }

    // Optimal object-to-track matching on the padded square count matrix.
    let side = num_objects.max(num_ids);
    let mut profit = vec![vec![0.0f64; side]; side];
    for (o, row) in counts.iter().enumerate() {
        for (t, &c) in row.iter().enumerate() {
            profit[o][t] = c as f64;
        }
    }
    let matching = hungarian_max(&profit);
    let correct: u64 = matching
        .iter()
        .enumerate()
        .take(num_objects)
        .map(|(o, &t)| if t < num_ids { counts[o][t] } else { 0 })
        .sum();
    let detection_accuracy = if total_detections == 0 {
        1.0
    } else {
        correct as f64 / total_detections as f64
    };

    // Identity switches per ground-truth object: a switch whenever the id at
    // the object's detection changes between consecutive tracked frames.
    let mut id_switches = 0u64;
    for object in 0..num_objects {
        let mut last: Option<u64> = None;
        for (frame, row) in tracks.assignments.iter().enumerate() {
            let det = scenario.ground_truth[frame]
                .iter()
                .position(|&o| o == object)
                .expect("every object appears once per frame");
            if let Some(id) = row[det] {
                if let Some(prev) = last {
                    if prev != id {
                        id_switches += 1;
                    }
                }
                last = Some(id);
            }
        }
    }

    // A segment is exact when its decoded partition matches the ground truth:
    // objects map one-to-one onto local tracks and nothing is labeled FP.
    let mut exact_segments = 0usize;
    for report in &tracks.segments {
        if segment_is_exact(report.start_frame, &report.assignment, scenario) {
            exact_segments += 1;
        }
    }
    let exact_segment_rate = if tracks.segments.is_empty() {
        0.0
    } else {
        exact_segments as f64 / tracks.segments.len() as f64
    };

    Ok(Metrics {
        detection_accuracy,
        id_switches,
        false_positive_labels,
        exact_segment_rate,
        total_detections,
        num_tracks: tracks.num_tracks,
    })
}

fn segment_is_exact(
    start_frame: usize,
    assignment: &[Vec<Option<usize>>],
    scenario: &Scenario,
) -> bool {
    let mut object_track: std::collections::HashMap<usize, usize> =
        std::collections::HashMap::new();
    let mut track_object: std::collections::HashMap<usize, usize> =
        std::collections::HashMap::new();
    for (local_frame, row) in assignment.iter().enumerate() {
        let frame = start_frame + local_frame;
        for (det, track) in row.iter().enumerate() {
            let object = scenario.ground_truth[frame][det];
            let Some(track) = track else {
                return false;
            };
            if *object_track.entry(object).or_insert(*track) != *track {
                return false;
            }
            if *track_object.entry(*track).or_insert(object) != object {
                return false;
            }
        }
    }
    true
}
