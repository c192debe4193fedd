//! Metropolis single-flip simulated annealing with a geometric cooling
//! schedule. Reads are independent and use per-read RNG streams derived from
//! `(seed, read index)`, so parallel and serial execution produce identical
//! sample sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{SampleSet, Sampler};
use crate::error::{Error, Result};
use crate::qubo::{IsingProblem, Qubo};

/// Annealing parameters shared by all reads.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    /// Full single-flip sweeps per read.
    pub sweeps: u32,
    /// Starting temperature; `None` derives it from the largest single-flip
    /// energy magnitude of the problem.
    pub initial_temperature: Option<f64>,
    /// Final temperature of the geometric schedule.
    pub final_temperature: f64,
    /// Number of independent reads.
    pub reads: u32,
    pub seed: u64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            sweeps: 1000,
            initial_temperature: None,
            final_temperature: 0.05,
            reads: 1000,
            seed: 0,
        }
    }
}

impl AnnealSchedule {
    pub fn with_reads(mut self, reads: u32) -> Self {
        self.reads = reads;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sweeps(mut self, sweeps: u32) -> Self {
        self.sweeps = sweeps;
        self
    }

    fn validate(&self, max_flip: f64) -> Result<f64> {
        if self.sweeps < 1 {
            return Err(Error::Parameter("sweeps must be >= 1".into()));
        }
        if self.reads < 1 {
            return Err(Error::Parameter("reads must be >= 1".into()));
        }
        if self.final_temperature.is_nan() || self.final_temperature <= 0.0 {
            return Err(Error::Parameter(format!(
                "final temperature must be positive, got {}",
                self.final_temperature
            )));
        }
        let t0 = match self.initial_temperature {
            Some(t) => t,
            None => max_flip.max(4.0 * self.final_temperature),
        };
        if t0.is_nan() || t0 <= self.final_temperature {
            return Err(Error::Parameter(format!(
                "initial temperature {t0} must exceed final temperature {}",
                self.final_temperature
            )));
        }
        Ok(t0)
    }
}

/// Annealing backend with a fixed schedule.
#[derive(Debug, Clone)]
pub struct Annealer {
    pub schedule: AnnealSchedule,
}

impl Annealer {
    pub fn new(schedule: AnnealSchedule) -> Self {
        Annealer { schedule }
    }
}

impl Sampler for Annealer {
    fn sample(&self, qubo: &Qubo) -> Result<SampleSet> {
        anneal(qubo, &self.schedule)
    }

    fn name(&self) -> &'static str {
        "anneal"
    }
}

/// Anneals the binary form. Deterministic for a fixed schedule.
pub fn anneal(qubo: &Qubo, schedule: &AnnealSchedule) -> Result<SampleSet> {
    let n = qubo.num_variables();
    if n == 0 {
        return Err(Error::Parameter("cannot anneal a 0-variable QUBO".into()));
    }
    let t0 = schedule.validate(qubo.max_flip_magnitude())?;
    let adjacency = qubo.adjacency();
    let base_fields: Vec<f64> = (0..n).map(|i| qubo.effective_linear(i)).collect();

    let records: Vec<(Vec<bool>, f64)> = (0..schedule.reads)
        .into_par_iter()
        .map(|read| {
            let state = run_read(
                n,
                &base_fields,
                &adjacency,
                FlipRule::Binary,
                schedule,
                t0,
                read,
            );
            let energy = qubo.energy(&state).expect("state length matches");
            (state, energy)
        })
        .collect();

    Ok(SampleSet::from_records(
        records,
        schedule.reads as u64,
        Some(schedule.seed),
        "anneal",
    ))
}

/// Anneals the spin form and maps the measured spins back to binary states
/// (`+1 -> 1`, `-1 -> 0`). With matched seeds this follows the same proposal
/// and acceptance sequence as [`anneal`] on the corresponding binary problem.
pub fn anneal_spin(ising: &IsingProblem, schedule: &AnnealSchedule) -> Result<SampleSet> {
    let n = ising.num_variables();
    if n == 0 {
        return Err(Error::Parameter("cannot anneal a 0-variable problem".into()));
    }
    let max_flip = {
        let mut bound: Vec<f64> = ising.fields().iter().map(|h| h.abs()).collect();
        for (&(i, j), &v) in ising.couplings() {
            bound[i] += v.abs();
            bound[j] += v.abs();
        }
        2.0 * bound.into_iter().fold(0.0, f64::max)
    };
    let t0 = schedule.validate(max_flip)?;
    let adjacency = ising.adjacency();
    let base_fields = ising.fields().to_vec();

    let records: Vec<(Vec<bool>, f64)> = (0..schedule.reads)
        .into_par_iter()
        .map(|read| {
            let state = run_read(
                n,
                &base_fields,
                &adjacency,
                FlipRule::Spin,
                schedule,
                t0,
                read,
            );
            let energy = ising.energy(&state).expect("state length matches");
            (state, energy)
        })
        .collect();

    Ok(SampleSet::from_records(
        records,
        schedule.reads as u64,
        Some(schedule.seed),
        "anneal-spin",
    ))
}

/// How a single flip changes the energy given the local field.
///
/// Binary: `delta = (1 - 2 z_k) * (b_k + sum_j Q_kj z_j)`.
/// Spin: `delta = -2 s_k * (h_k + sum_j J_kj s_j)`.
#[derive(Clone, Copy)]
enum FlipRule {
    Binary,
    Spin,
}

fn run_read(
    n: usize,
    base_fields: &[f64],
    adjacency: &[Vec<(usize, f64)>],
    rule: FlipRule,
    schedule: &AnnealSchedule,
    t0: f64,
    read: u32,
) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    rng.set_stream(read as u64);

    // `true` means z = 1 in binary form and s = +1 in spin form.
    let mut state: Vec<bool> = (0..n).map(|_| rng.random()).collect();

    // Local fields: b_k + sum_j Q_kj z_j in binary form, h_k + sum_j J_kj s_j
    // in spin form.
    let mut fields: Vec<f64> = base_fields.to_vec();
    for k in 0..n {
        match rule {
            FlipRule::Binary => {
                if state[k] {
                    for &(j, w) in &adjacency[k] {
                        fields[j] += w;
                    }
                }
            }
            FlipRule::Spin => {
                let sign = if state[k] { 1.0 } else { -1.0 };
                for &(j, w) in &adjacency[k] {
                    fields[j] += sign * w;
                }
            }
        }
    }

    let sweeps = schedule.sweeps;
    let ratio = if sweeps > 1 {
        (schedule.final_temperature / t0).powf(1.0 / (sweeps as f64 - 1.0))
    } else {
        1.0
    };
    let mut temperature = t0;
    for _ in 0..sweeps {
        let inv_t = 1.0 / temperature;
        for k in 0..n {
            let delta = match rule {
                FlipRule::Binary => {
                    if state[k] {
                        -fields[k]
                    } else {
                        fields[k]
                    }
                }
                FlipRule::Spin => {
                    if state[k] {
                        -2.0 * fields[k]
                    } else {
                        2.0 * fields[k]
                    }
                }
            };
            let accept = delta <= 0.0 || rng.random::<f64>() < (-delta * inv_t).exp();
            if accept {
                state[k] = !state[k];
                match rule {
                    FlipRule::Binary => {
                        let sign = if state[k] { 1.0 } else { -1.0 };
                        for &(j, w) in &adjacency[k] {
                            fields[j] += sign * w;
                        }
                    }
                    FlipRule::Spin => {
                        let sign = if state[k] { 2.0 } else { -2.0 };
                        for &(j, w) in &adjacency[k] {
                            fields[j] += sign * w;
                        }
                    }
                }
            }
        }
        temperature *= ratio;
    }
    state
}
