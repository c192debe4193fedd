//! Adaptive per-constraint penalty multipliers: solve the penalized QUBO,
//! estimate the energy advantage each violated constraint buys, and raise its
//! multiplier just past that advantage. Each effective multiplier decomposes
//! as `lambda_i = lambda_base + lambda_prime_i + lambda_offset`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{apply_penalties, ConstraintRow, ConstraintSystem, Qubo};
use crate::sampler::{SampleSet, Sampler};

/// Per-constraint multiplier decomposition and the optimization progress.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierState {
    pub lambda_base: f64,
    pub lambda_prime: Vec<f64>,
    pub lambda_offset: f64,
    pub iterations: u32,
    pub converged: bool,
}

impl MultiplierState {
    /// Fresh state with `lambda_prime = 0` and `lambda_offset = 0`.
    pub fn new(lambda_base: f64, num_constraints: usize) -> Self {
        MultiplierState {
            lambda_base,
            lambda_prime: vec![0.0; num_constraints],
            lambda_offset: 0.0,
            iterations: 0,
            converged: false,
        }
    }

    /// Effective multipliers `lambda_base + lambda_prime_i + lambda_offset`.
    pub fn effective(&self) -> Vec<f64> {
        self.lambda_prime
            .iter()
            .map(|p| self.lambda_base + p + self.lambda_offset)
            .collect()
    }

    /// Constraint system carrying the effective multipliers.
    pub fn apply(&self, constraints: &ConstraintSystem) -> Result<ConstraintSystem> {
        constraints.with_multipliers(&self.effective())
    }
}

/// Tuning knobs for the multiplier estimation loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierConfig {
    /// Base value resolving the easy constraints.
    pub lambda_base: f64,
    /// Safety margin added on top of the estimated advantage.
    pub epsilon: f64,
    /// Samples within this absolute energy window of the best one contribute
    /// multiplier candidates.
    pub energy_window: f64,
    /// Offset added to every multiplier after convergence to widen the
    /// spectral gap.
    pub lambda_offset: f64,
    pub max_iterations: u32,
}

impl Default for MultiplierConfig {
    fn default() -> Self {
        MultiplierConfig {
            lambda_base: 0.5,
            epsilon: 0.05,
            energy_window: 0.5,
            lambda_offset: 0.0,
            max_iterations: 20,
        }
    }
}

/// Signed violation `G_i . z - d_i` of one constraint row.
pub fn violation(row: &ConstraintRow, state: &[bool]) -> f64 {
    row.violation(state)
}

/// Estimated energy advantage per squared unit of violation:
/// `a_i = 2 * (sum_k w_k - min_k w_k) / v_i^2` over the active masked
/// variables `k` (those in the row with `z_k = 1`), where `w_k` is the
/// half-interaction field `b_k + Q_kk + sum_j Q_kj z_j / 2`. Negative values
/// mean the violation lowers the energy. Requires a positive violation.
pub fn violation_gain(qubo: &Qubo, row: &ConstraintRow, state: &[bool]) -> Result<f64> {
    if state.len() != qubo.num_variables() {
        return Err(Error::Dimension(format!(
            "state length {} does not match QUBO with {} variables",
            state.len(),
            qubo.num_variables()
        )));
    }
    let v = row.violation(state);
    if v <= 0.0 {
        return Err(Error::Parameter(format!(
            "violation gain requires a positive violation, got {v}"
        )));
    }

    let mut half: Vec<f64> = vec![0.0; qubo.num_variables()];
    for (&(i, j), &w) in qubo.quadratic() {
        if i == j {
            continue;
        }
        if state[j] {
            half[i] += w / 2.0;
        }
        if state[i] {
            half[j] += w / 2.0;
        }
    }

    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    for &k in &row.vars {
        if state[k] {
            let w = qubo.effective_linear(k) + half[k];
            sum += w;
            min = min.min(w);
        }
    }
    Ok(2.0 * (sum - min) / (v * v))
}

/// One multiplier update from a sample set: every sample within the energy
/// window of the best one contributes `lambda_prime_i = -a_i - lambda_base +
/// epsilon` for each of its positively violated constraints, merged by
/// per-constraint maximum. With no positive violations in the window the
/// state comes back unchanged with `converged` set.
pub fn update_multipliers(
    state: &MultiplierState,
    qubo: &Qubo,
    constraints: &ConstraintSystem,
    samples: &SampleSet,
    config: &MultiplierConfig,
) -> Result<MultiplierState> {
    if samples.is_empty() {
        return Err(Error::Parameter("multiplier update needs samples".into()));
    }
    if state.lambda_prime.len() != constraints.len() {
        return Err(Error::Dimension(format!(
            "{} multipliers for {} constraints",
            state.lambda_prime.len(),
            constraints.len()
        )));
    }
    let mut next = state.clone();
    let mut any_violated = false;
    for sample in samples.within_window(config.energy_window) {
        for (i, row) in constraints.rows().iter().enumerate() {
            if row.violation(&sample.state) > 0.0 {
                any_violated = true;
                let gain = violation_gain(qubo, row, &sample.state)?;
                let candidate = -gain - state.lambda_base + config.epsilon;
                if candidate > next.lambda_prime[i] {
                    next.lambda_prime[i] = candidate;
                }
            }
        }
    }
    next.converged = !any_violated;
    Ok(next)
}

/// Runs the solve/update loop from `lambda_prime = 0`, `lambda_offset = 0`
/// until the best sample of the penalized problem is feasible or
/// `max_iterations` is hit, then adds the configured offset. A non-converged
/// state is returned with the flag cleared rather than as an error; callers
/// may fall back to [`fallback_multipliers`].
pub fn optimize_multipliers<S: Sampler + ?Sized>(
    qubo: &Qubo,
    constraints: &ConstraintSystem,
    solver: &S,
    config: &MultiplierConfig,
) -> Result<MultiplierState> {
    let mut state = MultiplierState::new(config.lambda_base, constraints.len());
    for iteration in 0..=config.max_iterations {
        let penalized = apply_penalties(qubo, &state.apply(constraints)?)?;
        let samples = solver.sample(&penalized)?;
        let best = samples
            .best()
            .ok_or_else(|| Error::Infeasible("solver returned an empty sample set".into()))?;
        state.iterations = iteration;
        if constraints.is_feasible(&best.state) {
            state.converged = true;
            break;
        }
        if iteration == config.max_iterations {
            break;
        }
        let next = update_multipliers(&state, qubo, constraints, &samples, config)?;
        if next.lambda_prime == state.lambda_prime {
            // Either only under-assignment violations remain or candidates
            // stopped growing; more iterations cannot make progress.
            break;
        }
        state = next;
        state.converged = false;
    }
    state.lambda_offset = config.lambda_offset;
    Ok(state)
}

/// Uniform multiplier escape hatch: twice the largest single-flip energy
/// magnitude of the cost QUBO, which no single violation can out-gain.
pub fn fallback_multipliers(qubo: &Qubo, constraints: &ConstraintSystem) -> MultiplierState {
    let lambda = 2.0 * qubo.max_flip_magnitude().max(0.5);
    let mut state = MultiplierState::new(lambda, constraints.len());
    state.converged = true;
    state
}
