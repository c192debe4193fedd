//! Solution-probability sweeps over the penalty weight: either a uniform
//! multiplier (fixed mode) or the offset added to optimized per-constraint
//! multipliers (optimized mode).

use serde::{Deserialize, Serialize};

use super::reference::best_feasible_assignment;
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::lagrangian::{optimize_multipliers, MultiplierConfig, MultiplierState};
use crate::qubo::{apply_penalties, build_cost, ConstraintSystem};
use crate::sampler::{anneal, derive_seed, AnnealSchedule, Annealer, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// One uniform multiplier per sweep value.
    Fixed,
    /// Per-constraint multipliers optimized once, then swept over the offset.
    Optimized,
}

/// How the reference energy of a sweep was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// Exact optimum over feasible assignments.
    FeasibleOptimum,
    /// Instance too large for the exact reference; best energy ever observed.
    BestObserved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub mode: SweepMode,
    /// Multiplier values (fixed mode) or offsets (optimized mode).
    pub values: Vec<f64>,
    pub reads: u32,
    pub sweeps: u32,
    pub seed: u64,
    /// Reads per solve inside the multiplier optimization loop.
    pub optimize_reads: u32,
    pub multipliers: MultiplierConfig,
    /// Energies within this tolerance of the reference count as solutions.
    pub tolerance: f64,
    /// State-space cap for the exact feasible reference.
    pub reference_cap: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            mode: SweepMode::Fixed,
            values: Vec::new(),
            reads: 4096,
            sweeps: 100,
            seed: 0,
            optimize_reads: 512,
            multipliers: MultiplierConfig::default(),
            tolerance: 1e-6,
            reference_cap: 1 << 22,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub sigma: f64,
    pub reads: u64,
    /// Fraction of reads that measured the correct solution: a feasible
    /// state at the reference energy (or below, within tolerance).
    pub solution_probability: f64,
    pub best_energy: f64,
    pub reference_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub mode: SweepMode,
    pub reference: ReferenceKind,
    pub rows: Vec<SweepRow>,
    /// Optimized mode only: the multiplier state shared by every row.
    pub multiplier_state: Option<MultiplierState>,
}

/// Runs the sweep. Each value builds its penalized QUBO, anneals with
/// `reads` reads, and records the solution probability against the exact
/// feasible optimum (or against the best observed energy when the instance
/// is too large for the exact reference, flagged in the report).
pub fn lambda_sweep(scenario: &Scenario, config: &SweepConfig) -> Result<SweepReport> {
    if config.values.is_empty() {
        return Err(Error::Parameter("sweep needs at least one value".into()));
    }
    let spec = &scenario.spec;
    let cost = build_cost(spec);
    let constraints = ConstraintSystem::for_spec(spec);

    let reference_state = match best_feasible_assignment(spec, config.reference_cap) {
        Ok((assignment, _)) => Some(assignment.as_state().to_vec()),
        Err(Error::Size(_)) => None,
        Err(e) => return Err(e),
    };
    let reference = if reference_state.is_some() {
        ReferenceKind::FeasibleOptimum
    } else {
        ReferenceKind::BestObserved
    };

    let multiplier_state = match config.mode {
        SweepMode::Fixed => None,
        SweepMode::Optimized => {
            let solver = Annealer::new(AnnealSchedule {
                sweeps: config.sweeps,
                initial_temperature: None,
                final_temperature: 0.05,
                reads: config.optimize_reads,
                seed: derive_seed(config.seed, u64::MAX),
            });
            Some(optimize_multipliers(
                &cost,
                &constraints,
                &solver,
                &config.multipliers,
            )?)
        }
    };

    // Solve every value first; probabilities are resolved afterwards so the
    // best-observed fallback can use the global best.
    let mut solves: Vec<(f64, SampleSet, f64)> = Vec::with_capacity(config.values.len());
    for (index, &value) in config.values.iter().enumerate() {
        let penalized = match (&config.mode, &multiplier_state) {
            (SweepMode::Fixed, _) => {
                if value < 0.0 {
                    return Err(Error::Parameter(format!("negative multiplier {value}")));
                }
                apply_penalties(&cost, &constraints.with_uniform_multiplier(value))?
            }
            (SweepMode::Optimized, Some(state)) => {
                let mut offset_state = state.clone();
                offset_state.lambda_offset = value;
                apply_penalties(&cost, &offset_state.apply(&constraints)?)?
            }
            (SweepMode::Optimized, None) => unreachable!("state built above"),
        };
        let schedule = AnnealSchedule {
            sweeps: config.sweeps,
            initial_temperature: None,
            final_temperature: 0.05,
            reads: config.reads,
            seed: derive_seed(config.seed, index as u64),
        };
        let samples = anneal(&penalized, &schedule)?;
        let reference_energy = match &reference_state {
            Some(state) => penalized.energy(state)?,
            None => f64::NAN,
        };
        solves.push((value, samples, reference_energy));
    }

    let observed_best = solves
        .iter()
        .filter_map(|(_, samples, _)| samples.best_energy())
        .fold(f64::INFINITY, f64::min);

    let rows = solves
        .into_iter()
        .map(|(value, samples, reference_energy)| {
            let reference_energy = if reference_energy.is_nan() {
                observed_best
            } else {
                reference_energy
            };
            // Below a sufficient penalty, infeasible states sit under the
            // reference energy; only feasible reads count as solutions.
            let hits: u64 = samples
                .samples()
                .iter()
                .filter(|s| {
                    s.energy <= reference_energy + config.tolerance
                        && constraints.is_feasible(&s.state)
                })
                .map(|s| s.multiplicity)
                .sum();
            let total = samples.total_reads();
            SweepRow {
                value,
                sigma: scenario.params.sigma,
                reads: total,
                solution_probability: if total == 0 {
                    0.0
                } else {
                    hits as f64 / total as f64
                },
                best_energy: samples.best_energy().expect("reads >= 1"),
                reference_energy,
            }
        })
        .collect();

    Ok(SweepReport {
        mode: config.mode,
        reference,
        rows,
        multiplier_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::scenario::{generate_scenario, ScenarioParams};

    fn tiny_scenario() -> Scenario {
        // 2 objects over 3 frames with 3 real tracks (one spare, so the
        // unpenalized minimum duplicates chains): 3*3*4 = 36 variables.
        generate_scenario(&ScenarioParams {
            num_objects: 2,
            num_frames: 3,
            sigma: 0.0,
            seed: 11,
            max_frame_gap: 2,
            ..ScenarioParams::default()
        })
        .unwrap()
    }

    #[test]
    fn empty_value_list_is_rejected() {
        let scenario = tiny_scenario();
        let config = SweepConfig::default();
        assert!(matches!(
            lambda_sweep(&scenario, &config),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn zero_multiplier_has_zero_solution_probability() {
        // Without penalties the unconstrained minimum over-assigns, so no
        // read lands at the feasible optimum's energy.
        let scenario = tiny_scenario();
        let config = SweepConfig {
            values: vec![0.0],
            reads: 256,
            sweeps: 60,
            seed: 3,
            ..SweepConfig::default()
        };
        let report = lambda_sweep(&scenario, &config).unwrap();
        assert_eq!(report.reference, ReferenceKind::FeasibleOptimum);
        assert_eq!(report.rows[0].solution_probability, 0.0);
        assert!(report.rows[0].best_energy < report.rows[0].reference_energy);
    }

    #[test]
    fn adequate_multiplier_reaches_the_feasible_optimum() {
        let scenario = tiny_scenario();
        let config = SweepConfig {
            values: vec![3.0],
            reads: 256,
            sweeps: 60,
            seed: 5,
            ..SweepConfig::default()
        };
        let report = lambda_sweep(&scenario, &config).unwrap();
        let row = &report.rows[0];
        assert!(row.solution_probability > 0.0);
        assert!((row.best_energy - row.reference_energy).abs() < 1e-9);
    }

    #[test]
    fn optimized_mode_records_multiplier_state() {
        let scenario = tiny_scenario();
        let config = SweepConfig {
            mode: SweepMode::Optimized,
            values: vec![0.0, 1.0],
            reads: 256,
            sweeps: 60,
            seed: 7,
            optimize_reads: 128,
            ..SweepConfig::default()
        };
        let report = lambda_sweep(&scenario, &config).unwrap();
        let state = report.multiplier_state.expect("optimized mode");
        assert!(state.converged);
        assert_eq!(report.rows.len(), 2);
    }
}
