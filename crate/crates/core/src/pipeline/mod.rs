//! End-to-end tracking: scenario generation, segmentation, per-segment
//! solving, identity stitching, track separation, metrics, and the penalty
//! sweep experiment runner.

mod hungarian;
pub mod metrics;
pub mod reference;
pub mod scenario;
pub mod segmenting;
pub mod stitch;
pub mod sweep;
pub mod track;

pub use metrics::{evaluate, Metrics};
pub use reference::{best_feasible_assignment, enumerate_feasible_assignments};
pub use scenario::{generate_scenario, Scenario, ScenarioParams};
pub use segmenting::{segment, SegmentSpec};
pub use stitch::{stitch, stitch_objective, DEFAULT_NO_OVERLAP_VALUE};
pub use sweep::{lambda_sweep, ReferenceKind, SweepConfig, SweepMode, SweepReport, SweepRow};
pub use track::{track, SegmentReport, SolverBackend, StitchRecord, TrackConfig, TrackSet};
