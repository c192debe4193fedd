//! Exhaustive enumeration oracle for small instances.

use super::{Sample, SampleSet, Sampler};
use crate::error::{Error, Result};
use crate::qubo::Qubo;

/// Exhaustive solver: enumerates all `2^n` states in Gray-code order and
/// returns every state within an energy window of the minimum, minimum first.
#[derive(Debug, Clone)]
pub struct BruteForce {
    /// Hard cap on the variable count; enumeration is `2^n`.
    pub max_variables: usize,
    /// States with energy within this window of the minimum are returned.
    pub energy_window: f64,
    /// At most this many states are retained, lowest energies first.
    pub max_states: usize,
}

impl Default for BruteForce {
    fn default() -> Self {
        BruteForce {
            max_variables: 24,
            energy_window: 1.0,
            max_states: 65_536,
        }
    }
}

impl BruteForce {
    pub fn new(max_variables: usize, energy_window: f64) -> Self {
        BruteForce {
            max_variables,
            energy_window,
            ..BruteForce::default()
        }
    }
}

impl Sampler for BruteForce {
    fn sample(&self, qubo: &Qubo) -> Result<SampleSet> {
        brute_force(qubo, self)
    }

    fn name(&self) -> &'static str {
        "brute"
    }
}

/// Runs the exhaustive enumeration. Deterministic: the result depends only on
/// the QUBO and the configuration.
pub fn brute_force(qubo: &Qubo, config: &BruteForce) -> Result<SampleSet> {
    let n = qubo.num_variables();
    if n > config.max_variables {
        return Err(Error::Size(format!(
            "{n} variables exceed the exhaustive cap of {}; use the annealer instead",
            config.max_variables
        )));
    }
    if n == 0 {
        return Err(Error::Parameter("cannot enumerate a 0-variable QUBO".into()));
    }

    // Pass 1: exact minimum via Gray-code single-flip walk.
    let minimum = sweep(qubo, n, f64::INFINITY, |_, _| {});

    // Pass 2: collect states within the window. Incremental energies can
    // drift by a few ulps over 2^n updates, so collection uses a small slack
    // and every kept state is re-evaluated exactly.
    let cutoff = minimum + config.energy_window + 1e-9;
    let mut kept: Vec<(Vec<bool>, f64)> = Vec::new();
    sweep(qubo, n, cutoff, |state, _| {
        let exact = qubo.energy(state).expect("state length matches");
        if exact <= minimum + config.energy_window + 1e-12 {
            kept.push((state.to_vec(), exact));
        }
    });

    kept.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    kept.truncate(config.max_states);

    let samples: Vec<Sample> = kept
        .into_iter()
        .map(|(state, energy)| Sample {
            state,
            energy,
            multiplicity: 1,
        })
        .collect();
    let reads = samples.len() as u64;
    let mut set = SampleSet::from_records(
        samples.into_iter().map(|s| (s.state, s.energy)).collect(),
        reads,
        None,
        "brute",
    );
    set.reads = reads;
    Ok(set)
}

/// Walks all `2^n` states in Gray-code order, invoking `visit` for every
/// state with incremental energy at most `cutoff`, and returns the minimum
/// incremental energy seen. The all-zero state is visited first.
fn sweep(qubo: &Qubo, n: usize, cutoff: f64, mut visit: impl FnMut(&[bool], f64)) -> f64 {
    let adjacency = qubo.adjacency();
    let mut state = vec![false; n];
    let mut fields: Vec<f64> = (0..n).map(|i| qubo.effective_linear(i)).collect();
    let mut energy = qubo.offset();
    let mut minimum = energy;
    if energy <= cutoff {
        visit(&state, energy);
    }

    let total: u64 = 1 << n;
    for step in 1..total {
        let k = step.trailing_zeros() as usize;
        // Flip variable k: delta = (1 - 2 z_k) * field_k.
        let delta = if state[k] { -fields[k] } else { fields[k] };
        energy += delta;
        state[k] = !state[k];
        let sign = if state[k] { 1.0 } else { -1.0 };
        for &(j, w) in &adjacency[k] {
            fields[j] += sign * w;
        }
        if energy < minimum {
            minimum = energy;
        }
        if energy <= cutoff {
            visit(&state, energy);
        }
    }
    minimum
}
