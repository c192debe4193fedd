//! Splitting a long instance into overlapping subproblems.

use crate::error::{Error, Result};
use crate::model::ProblemSpec;

/// A subproblem with its position in the full sequence. Frames inside the
/// segment spec are local, starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpec {
    pub start_frame: usize,
    pub spec: ProblemSpec,
}

impl SegmentSpec {
    pub fn end_frame(&self) -> usize {
        self.start_frame + self.spec.num_frames()
    }
}

/// Splits a spec into segments of `segment_length` frames where consecutive
/// segments share exactly `overlap` frames; the final segment may be shorter
/// so the union covers every frame. Similarities are restricted to pairs with
/// both endpoints inside a segment.
pub fn segment(
    spec: &ProblemSpec,
    segment_length: usize,
    overlap: usize,
) -> Result<Vec<SegmentSpec>> {
    if segment_length == 0 {
        return Err(Error::Parameter("segment_length must be >= 1".into()));
    }
    if overlap >= segment_length {
        return Err(Error::Parameter(format!(
            "overlap {overlap} must be smaller than segment_length {segment_length}"
        )));
    }
    let num_frames = spec.num_frames();
    if segment_length >= num_frames {
        return Ok(vec![SegmentSpec {
            start_frame: 0,
            spec: spec.clone(),
        }]);
    }

    let step = segment_length - overlap;
    let mut segments = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + segment_length).min(num_frames);
        segments.push(SegmentSpec {
            start_frame: start,
            spec: restrict(spec, start, end)?,
        });
        if end == num_frames {
            break;
        }
        start += step;
    }
    Ok(segments)
}

/// Copy of the spec restricted to frames `[start, end)`, with frames
/// renumbered to start at zero.
fn restrict(spec: &ProblemSpec, start: usize, end: usize) -> Result<ProblemSpec> {
    let mut out = ProblemSpec::new(
        end - start,
        spec.num_real_detections(),
        spec.num_real_tracks(),
        spec.max_frame_gap(),
        spec.false_positive_bonus(),
    )?;
    for (key, &value) in spec.similarities() {
        if key.frame_i >= start && key.frame_j < end {
            out.set_similarity(
                key.frame_i - start,
                key.det_i,
                key.frame_j - start,
                key.det_j,
                value,
            )?;
        }
    }
    Ok(out)
}
