//! Tracking-by-detection formulated as quadratic unconstrained binary
//! optimization.
//!
//! A tracking instance assigns detections to tracks through per-frame binary
//! assignment matrices. Pairwise appearance similarities become quadratic
//! costs between same-track variables, equality constraints (one detection
//! per real track, one track per real detection) become squared penalties
//! with per-constraint multipliers, and the resulting QUBO is solved by
//! simulated annealing or exhaustive search. Long sequences are split into
//! overlapping segments whose track identities are stitched by a linear-sum
//! matching on shared detections.
//!
//! Crate layout mirrors the processing stages:
//!
//! - [`model`]: problem instances, variable indexing, assignment decoding.
//! - [`qubo`]: cost assembly, penalties, regularization, spin conversion.
//! - [`lagrangian`]: adaptive multiplier estimation.
//! - [`sampler`]: annealing and exhaustive backends, sample statistics.
//! - [`pipeline`]: scenarios, segmentation, stitching, metrics, sweeps.
//! - [`formats`]: versioned JSON/CSV interchange.

pub mod error;
pub mod formats;
pub mod lagrangian;
pub mod model;
pub mod pipeline;
pub mod qubo;
pub mod sampler;

pub use error::{Error, Result};
pub use lagrangian::{
    fallback_multipliers, optimize_multipliers, update_multipliers, violation, violation_gain,
    MultiplierConfig, MultiplierState,
};
pub use model::{
    assignment_score, check_feasibility, decode, Assignment, ConstraintKind, FeasibilityReport,
    ProblemSpec, SimKey, VariableIndex, Violation,
};
pub use qubo::{
    apply_penalties, build_cost, regularize, to_spin, ConstraintRow, ConstraintSystem,
    IsingProblem, Qubo,
};
pub use sampler::{
    anneal, anneal_spin, brute_force, derive_seed, energy_histogram, solution_probability,
    AnnealSchedule, Annealer, BruteForce, Sample, SampleSet, Sampler,
};
