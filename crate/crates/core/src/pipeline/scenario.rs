//! Synthetic tracking scenarios: objects in every frame with detection order
//! permuted per frame, and pairwise similarities of `0.8` for same-object
//! pairs and `-0.8` otherwise, plus Gaussian noise truncated to `[-1, 1]`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemSpec;

pub const MATCH_SIMILARITY: f64 = 0.8;
pub const MISMATCH_SIMILARITY: f64 = -0.8;

/// Parameters of a synthetic scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub num_objects: usize,
    pub num_frames: usize,
    /// Standard deviation of the Gaussian similarity noise.
    pub sigma: f64,
    pub seed: u64,
    /// Permute the detection order per frame.
    pub shuffle: bool,
    pub max_frame_gap: usize,
    /// Real tracks to model; defaults to `num_objects + 1`.
    pub num_real_tracks: Option<usize>,
    pub false_positive_bonus: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            num_objects: 3,
            num_frames: 5,
            sigma: 0.0,
            seed: 0,
            shuffle: true,
            max_frame_gap: 3,
            num_real_tracks: None,
            false_positive_bonus: -0.2,
        }
    }
}

/// A generated scenario: the ground-truth object of every detection slot and
/// the derived problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: ScenarioParams,
    /// `ground_truth[frame][detection] = object id`.
    pub ground_truth: Vec<Vec<usize>>,
    pub spec: ProblemSpec,
}

/// Generates a scenario deterministically from its parameters.
pub fn generate_scenario(params: &ScenarioParams) -> Result<Scenario> {
    if params.num_objects < 1 {
        return Err(Error::Parameter("num_objects must be >= 1".into()));
    }
    if params.sigma.is_nan() || params.sigma < 0.0 {
        return Err(Error::Parameter(format!(
            "sigma must be >= 0, got {}",
            params.sigma
        )));
    }
    let num_real_tracks = params.num_real_tracks.unwrap_or(params.num_objects + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut ground_truth = Vec::with_capacity(params.num_frames);
    for _ in 0..params.num_frames {
        let mut order: Vec<usize> = (0..params.num_objects).collect();
        if params.shuffle {
            order.shuffle(&mut rng);
        }
        ground_truth.push(order);
    }

    let mut spec = ProblemSpec::new(
        params.num_frames,
        params.num_objects,
        num_real_tracks,
        params.max_frame_gap,
        params.false_positive_bonus,
    )?;

    let noise = if params.sigma > 0.0 {
        Some(Normal::new(0.0, params.sigma).map_err(|e| {
            Error::Parameter(format!("invalid noise distribution: {e}"))
        })?)
    } else {
        None
    };

    for frame_i in 0..params.num_frames {
        let last = (frame_i + params.max_frame_gap).min(params.num_frames - 1);
        for frame_j in (frame_i + 1)..=last {
            for det_i in 0..params.num_objects {
                for det_j in 0..params.num_objects {
                    let base = if ground_truth[frame_i][det_i] == ground_truth[frame_j][det_j] {
                        MATCH_SIMILARITY
                    } else {
                        MISMATCH_SIMILARITY
                    };
                    let value = match &noise {
                        Some(normal) => base + normal.sample(&mut rng),
                        None => base,
                    };
                    // set_similarity truncates to [-1, 1].
                    spec.set_similarity(frame_i, det_i, frame_j, det_j, value)?;
                }
            }
        }
    }

    Ok(Scenario {
        params: params.clone(),
        ground_truth,
        spec,
    })
}
