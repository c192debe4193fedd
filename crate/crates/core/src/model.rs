//! Tracking problem instances, assignment matrices, and the bijection between
//! matrix entries and flat binary variables.
//!
//! A problem over `F` frames uses one `D x T` binary assignment matrix per
//! frame, where detections are rows and tracks are columns. Row `D-1` is the
//! dummy detection and column `T-1` is the dummy track; both are exempt from
//! the equality constraints. Variable `(f, d, t)` maps to flat index
//! `f*D*T + d*T + t`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Key of a directed pairwise similarity entry. Entries are stored once with
/// `frame_i < frame_j`; both detections are real.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SimKey {
    pub frame_i: usize,
    pub det_i: usize,
    pub frame_j: usize,
    pub det_j: usize,
}

/// A tracking instance: dimensions, frame-gap horizon, pairwise similarity
/// scores, and the false-positive score `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    num_frames: usize,
    num_real_detections: usize,
    num_real_tracks: usize,
    max_frame_gap: usize,
    false_positive_bonus: f64,
    similarities: BTreeMap<SimKey, f64>,
}

impl ProblemSpec {
    /// Creates a spec with no similarity entries.
    ///
    /// `num_real_detections` and `num_real_tracks` count the real slots; one
    /// dummy detection row and one dummy track column are added on top.
    pub fn new(
        num_frames: usize,
        num_real_detections: usize,
        num_real_tracks: usize,
        max_frame_gap: usize,
        false_positive_bonus: f64,
    ) -> Result<Self> {
        if num_frames < 1 {
            return Err(Error::Parameter("num_frames must be >= 1".into()));
        }
        if num_real_detections < 1 {
            return Err(Error::Parameter("num_real_detections must be >= 1".into()));
        }
        if num_real_tracks < 1 {
            return Err(Error::Parameter("num_real_tracks must be >= 1".into()));
        }
        if !false_positive_bonus.is_finite() {
            return Err(Error::Parameter("false_positive_bonus must be finite".into()));
        }
        Ok(ProblemSpec {
            num_frames,
            num_real_detections,
            num_real_tracks,
            max_frame_gap,
            false_positive_bonus,
            similarities: BTreeMap::new(),
        })
    }

    /// Inserts a similarity score for a detection pair. The key must span a
    /// frame gap in `[1, max_frame_gap]` and reference real detections; the
    /// value is truncated to `[-1, 1]`.
    pub fn set_similarity(
        &mut self,
        frame_i: usize,
        det_i: usize,
        frame_j: usize,
        det_j: usize,
        score: f64,
    ) -> Result<()> {
        if frame_j <= frame_i {
            return Err(Error::Parameter(format!(
                "similarity frames must satisfy frame_i < frame_j, got {frame_i} >= {frame_j}"
            )));
        }
        if frame_j - frame_i > self.max_frame_gap {
            return Err(Error::Parameter(format!(
                "similarity frame gap {} exceeds max_frame_gap {}",
                frame_j - frame_i,
                self.max_frame_gap
            )));
        }
        if frame_j >= self.num_frames {
            return Err(Error::Dimension(format!(
                "similarity frame {frame_j} out of range for {} frames",
                self.num_frames
            )));
        }
        if det_i >= self.num_real_detections || det_j >= self.num_real_detections {
            return Err(Error::Dimension(format!(
                "similarity detections ({det_i}, {det_j}) must be real (< {})",
                self.num_real_detections
            )));
        }
        if !score.is_finite() {
            return Err(Error::Parameter("similarity score must be finite".into()));
        }
        let key = SimKey {
            frame_i,
            det_i,
            frame_j,
            det_j,
        };
        self.similarities.insert(key, score.clamp(-1.0, 1.0));
        Ok(())
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    /// Total detection rows per frame, including the dummy detection.
    pub fn num_detections(&self) -> usize {
        self.num_real_detections + 1
    }

    /// Total track columns, including the dummy track.
    pub fn num_tracks(&self) -> usize {
        self.num_real_tracks + 1
    }

    pub fn num_real_detections(&self) -> usize {
        self.num_real_detections
    }

    pub fn num_real_tracks(&self) -> usize {
        self.num_real_tracks
    }

    /// Row index of the dummy detection.
    pub fn dummy_detection(&self) -> usize {
        self.num_real_detections
    }

    /// Column index of the dummy track.
    pub fn dummy_track(&self) -> usize {
        self.num_real_tracks
    }

    pub fn max_frame_gap(&self) -> usize {
        self.max_frame_gap
    }

    pub fn false_positive_bonus(&self) -> f64 {
        self.false_positive_bonus
    }

    /// Total variable count `F * D * T`.
    pub fn num_variables(&self) -> usize {
        self.num_frames * self.num_detections() * self.num_tracks()
    }

    pub fn similarities(&self) -> impl Iterator<Item = (&SimKey, &f64)> {
        self.similarities.iter()
    }

    pub fn num_similarities(&self) -> usize {
        self.similarities.len()
    }

    pub fn similarity(&self, frame_i: usize, det_i: usize, frame_j: usize, det_j: usize) -> Option<f64> {
        self.similarities
            .get(&SimKey {
                frame_i,
                det_i,
                frame_j,
                det_j,
            })
            .copied()
    }

    /// Maps `(frame, detection, track)` to the flat variable index
    /// `f*D*T + d*T + t`.
    pub fn flatten(&self, frame: usize, detection: usize, track: usize) -> Result<usize> {
        let d = self.num_detections();
        let t = self.num_tracks();
        if frame >= self.num_frames || detection >= d || track >= t {
            return Err(Error::Dimension(format!(
                "index ({frame}, {detection}, {track}) out of range for dims ({}, {d}, {t})",
                self.num_frames
            )));
        }
        Ok(frame * d * t + detection * t + track)
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn unflatten(&self, flat: usize) -> Result<VariableIndex> {
        if flat >= self.num_variables() {
            return Err(Error::Dimension(format!(
                "flat index {flat} out of range for {} variables",
                self.num_variables()
            )));
        }
        let t = self.num_tracks();
        let d = self.num_detections();
        Ok(VariableIndex {
            frame: flat / (d * t),
            detection: (flat / t) % d,
            track: flat % t,
            flat,
        })
    }
}

/// A variable position in both coordinates: the `(frame, detection, track)`
/// triple and its flat index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableIndex {
    pub frame: usize,
    pub detection: usize,
    pub track: usize,
    pub flat: usize,
}

/// Per-frame binary assignment matrices for a whole instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    num_frames: usize,
    num_detections: usize,
    num_tracks: usize,
    bits: Vec<bool>,
}

impl Assignment {
    /// All-zero assignment with the spec's dimensions.
    pub fn empty(spec: &ProblemSpec) -> Self {
        Assignment {
            num_frames: spec.num_frames(),
            num_detections: spec.num_detections(),
            num_tracks: spec.num_tracks(),
            bits: vec![false; spec.num_variables()],
        }
    }

    /// Wraps a flat state vector; the length must equal `F*D*T`.
    pub fn from_state(state: &[bool], spec: &ProblemSpec) -> Result<Self> {
        if state.len() != spec.num_variables() {
            return Err(Error::Dimension(format!(
                "state length {} does not match variable count {}",
                state.len(),
                spec.num_variables()
            )));
        }
        Ok(Assignment {
            num_frames: spec.num_frames(),
            num_detections: spec.num_detections(),
            num_tracks: spec.num_tracks(),
            bits: state.to_vec(),
        })
    }

    fn idx(&self, frame: usize, detection: usize, track: usize) -> usize {
        frame * self.num_detections * self.num_tracks + detection * self.num_tracks + track
    }

    pub fn get(&self, frame: usize, detection: usize, track: usize) -> bool {
        self.bits[self.idx(frame, detection, track)]
    }

    pub fn set(&mut self, frame: usize, detection: usize, track: usize, value: bool) {
        let i = self.idx(frame, detection, track);
        self.bits[i] = value;
    }

    /// The flat state vector backing this assignment.
    pub fn as_state(&self) -> &[bool] {
        &self.bits
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    /// Track column assigned to a real detection, if exactly one is set.
    pub fn track_of(&self, frame: usize, detection: usize) -> Option<usize> {
        let mut found = None;
        for t in 0..self.num_tracks {
            if self.get(frame, detection, t) {
                if found.is_some() {
                    return None;
                }
                found = Some(t);
            }
        }
        found
    }
}

/// Which equality constraint a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    /// Column sum over all detections for a real track.
    TrackColumn { frame: usize, track: usize },
    /// Row sum over all tracks for a real detection.
    DetectionRow { frame: usize, detection: usize },
}

/// A single violated equality constraint with its signed amount
/// `sum(entries) - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ConstraintKind,
    pub amount: i64,
}

/// Result of checking an assignment against the equality constraints.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Reshapes a flat binary state into per-frame assignment matrices and checks
/// every real-track column and real-detection row sum.
pub fn decode(state: &[bool], spec: &ProblemSpec) -> Result<(Assignment, FeasibilityReport)> {
    let assignment = Assignment::from_state(state, spec)?;
    let report = check_feasibility(&assignment, spec)?;
    Ok((assignment, report))
}

/// Feasibility check for an existing assignment.
pub fn check_feasibility(assignment: &Assignment, spec: &ProblemSpec) -> Result<FeasibilityReport> {
    ensure_dims(assignment, spec)?;
    let mut report = FeasibilityReport::default();
    for frame in 0..spec.num_frames() {
        for track in 0..spec.num_real_tracks() {
            let sum: i64 = (0..spec.num_detections())
                .filter(|&d| assignment.get(frame, d, track))
                .count() as i64;
            if sum != 1 {
                report.violations.push(Violation {
                    kind: ConstraintKind::TrackColumn { frame, track },
                    amount: sum - 1,
                });
            }
        }
        for detection in 0..spec.num_real_detections() {
            let sum: i64 = (0..spec.num_tracks())
                .filter(|&t| assignment.get(frame, detection, t))
                .count() as i64;
            if sum != 1 {
                report.violations.push(Violation {
                    kind: ConstraintKind::DetectionRow { frame, detection },
                    amount: sum - 1,
                });
            }
        }
    }
    Ok(report)
}

/// Score of an assignment under the spec: the sum of similarities over real
/// detection pairs sharing a real track within the frame-gap horizon, plus
/// `beta` for every real detection on the dummy track. This is the
/// maximization objective; the QUBO cost is its negation.
pub fn assignment_score(assignment: &Assignment, spec: &ProblemSpec) -> Result<f64> {
    ensure_dims(assignment, spec)?;
    let mut score = 0.0;
    for (key, &value) in spec.similarities() {
        for track in 0..spec.num_real_tracks() {
            if assignment.get(key.frame_i, key.det_i, track)
                && assignment.get(key.frame_j, key.det_j, track)
            {
                score += value;
            }
        }
    }
    let dummy = spec.dummy_track();
    for frame in 0..spec.num_frames() {
        for detection in 0..spec.num_real_detections() {
            if assignment.get(frame, detection, dummy) {
                score += spec.false_positive_bonus();
            }
        }
    }
    Ok(score)
}

fn ensure_dims(assignment: &Assignment, spec: &ProblemSpec) -> Result<()> {
    if assignment.num_frames != spec.num_frames()
        || assignment.num_detections != spec.num_detections()
        || assignment.num_tracks != spec.num_tracks()
    {
        return Err(Error::Dimension(format!(
            "assignment dims ({}, {}, {}) do not match spec dims ({}, {}, {})",
            assignment.num_frames,
            assignment.num_detections,
            assignment.num_tracks,
            spec.num_frames(),
            spec.num_detections(),
            spec.num_tracks()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(frames: usize, real_dets: usize, real_tracks: usize, gap: usize) -> ProblemSpec {
        ProblemSpec::new(frames, real_dets, real_tracks, gap, -0.2).unwrap()
    }

    #[test]
    fn flatten_origin_is_zero() {
        let s = spec(1, 1, 1, 1);
        assert_eq!(s.flatten(0, 0, 0).unwrap(), 0);
    }

    #[test]
    fn flatten_frame_stride() {
        // D=3, T=4: (f=1, d=0, t=0) -> 1*3*4 = 12
        let s = spec(2, 2, 3, 1);
        assert_eq!(s.num_detections(), 3);
        assert_eq!(s.num_tracks(), 4);
        assert_eq!(s.flatten(1, 0, 0).unwrap(), 12);
    }

    #[test]
    fn flatten_rejects_out_of_range() {
        let s = spec(2, 2, 3, 1);
        assert!(matches!(s.flatten(2, 0, 0), Err(Error::Dimension(_))));
        assert!(matches!(s.flatten(0, 3, 0), Err(Error::Dimension(_))));
        assert!(matches!(s.flatten(0, 0, 4), Err(Error::Dimension(_))));
        assert!(matches!(s.unflatten(24), Err(Error::Dimension(_))));
    }

    #[test]
    fn flatten_unflatten_roundtrip_exhaustive() {
        // 3 frames, D=3 (2 real + dummy)? Use dims 3x3x4x5 worth of variables:
        // frames=3, D=4, T=5 per the full-grid loop below.
        let s = spec(3, 3, 4, 2);
        let mut seen = vec![false; s.num_variables()];
        for f in 0..s.num_frames() {
            for d in 0..s.num_detections() {
                for t in 0..s.num_tracks() {
                    let flat = s.flatten(f, d, t).unwrap();
                    assert!(!seen[flat], "flat index {flat} hit twice");
                    seen[flat] = true;
                    let back = s.unflatten(flat).unwrap();
                    assert_eq!((back.frame, back.detection, back.track), (f, d, t));
                    assert_eq!(back.flat, flat);
                }
            }
        }
        assert!(seen.iter().all(|&b| b), "bijection must cover all indices");
    }

    #[test]
    fn decode_all_zeros_violates_both_constraints() {
        let s = spec(1, 1, 1, 1);
        let state = vec![false; s.num_variables()];
        let (_, report) = decode(&state, &s).unwrap();
        assert_eq!(report.violations.len(), 2);
        assert!(report
            .violations
            .iter()
            .all(|v| v.amount == -1), "empty assignment under-fills every constraint");
        assert!(report.violations.iter().any(|v| matches!(
            v.kind,
            ConstraintKind::TrackColumn { frame: 0, track: 0 }
        )));
        assert!(report.violations.iter().any(|v| matches!(
            v.kind,
            ConstraintKind::DetectionRow { frame: 0, detection: 0 }
        )));
    }

    #[test]
    fn decode_dummy_assignments_are_feasible() {
        // x[dummy-det, real-track] = 1 and x[real-det, dummy-track] = 1.
        let s = spec(1, 1, 1, 1);
        let mut a = Assignment::empty(&s);
        a.set(0, s.dummy_detection(), 0, true);
        a.set(0, 0, s.dummy_track(), true);
        let (_, report) = decode(a.as_state(), &s).unwrap();
        assert!(report.is_feasible());
    }

    #[test]
    fn decode_rejects_wrong_length() {
        let s = spec(1, 1, 1, 1);
        assert!(matches!(decode(&[true], &s), Err(Error::Dimension(_))));
    }

    #[test]
    fn decode_permutation_assignment_is_feasible() {
        // D-1 = T-1 = 4; a permutation of real detections onto real tracks
        // satisfies every constraint.
        let s = spec(2, 4, 4, 1);
        let mut a = Assignment::empty(&s);
        let perms = [[2usize, 0, 3, 1], [1usize, 3, 0, 2]];
        for (frame, perm) in perms.iter().enumerate() {
            for (det, &track) in perm.iter().enumerate() {
                a.set(frame, det, track, true);
            }
        }
        let report = check_feasibility(&a, &s).unwrap();
        assert!(report.is_feasible());
    }

    #[test]
    fn score_single_frame_is_beta_terms_only() {
        let s = spec(1, 2, 2, 1);
        let mut a = Assignment::empty(&s);
        a.set(0, 0, s.dummy_track(), true);
        a.set(0, 1, 0, true);
        a.set(0, s.dummy_detection(), 1, true);
        let score = assignment_score(&a, &s).unwrap();
        assert!((score - (-0.2)).abs() < 1e-12);
    }

    #[test]
    fn score_single_pair() {
        let mut s = spec(2, 1, 1, 1);
        s.set_similarity(0, 0, 1, 0, 0.8).unwrap();
        let mut a = Assignment::empty(&s);
        a.set(0, 0, 0, true);
        a.set(1, 0, 0, true);
        let score = assignment_score(&a, &s).unwrap();
        assert!((score - 0.8).abs() < 1e-12);
    }

    #[test]
    fn score_is_invariant_under_track_relabeling() {
        let mut s = spec(3, 2, 3, 2);
        s.set_similarity(0, 0, 1, 1, 0.7).unwrap();
        s.set_similarity(0, 1, 2, 0, -0.4).unwrap();
        s.set_similarity(1, 0, 2, 1, 0.9).unwrap();

        let mut a = Assignment::empty(&s);
        a.set(0, 0, 0, true);
        a.set(0, 1, 1, true);
        a.set(1, 0, 1, true);
        a.set(1, 1, 0, true);
        a.set(2, 0, 0, true);
        a.set(2, 1, 1, true);

        // Swap real tracks 0 and 1 consistently across frames.
        let mut b = Assignment::empty(&s);
        for f in 0..3 {
            for d in 0..s.num_detections() {
                b.set(f, d, 1, a.get(f, d, 0));
                b.set(f, d, 0, a.get(f, d, 1));
                b.set(f, d, 2, a.get(f, d, 2));
                b.set(f, d, 3, a.get(f, d, 3));
            }
        }
        let sa = assignment_score(&a, &s).unwrap();
        let sb = assignment_score(&b, &s).unwrap();
        assert!((sa - sb).abs() < 1e-12);
    }

    #[test]
    fn similarity_validation() {
        let mut s = spec(3, 2, 2, 1);
        assert!(matches!(
            s.set_similarity(0, 0, 2, 0, 0.5),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            s.set_similarity(1, 0, 0, 0, 0.5),
            Err(Error::Parameter(_))
        ));
        // Dummy detection is not a valid similarity endpoint.
        assert!(matches!(
            s.set_similarity(0, 2, 1, 0, 0.5),
            Err(Error::Dimension(_))
        ));
        // Values are truncated to [-1, 1].
        s.set_similarity(0, 0, 1, 0, 3.5).unwrap();
        assert_eq!(s.similarity(0, 0, 1, 0), Some(1.0));
    }
}
