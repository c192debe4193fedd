//! Solver backends behind a common sampling interface, plus sample-set
//! statistics (solution probability, energy histograms).

mod anneal;
mod brute;

pub use anneal::{anneal, anneal_spin, AnnealSchedule, Annealer};
pub use brute::{brute_force, BruteForce};

use crate::error::{Error, Result};
use crate::qubo::Qubo;

/// One measured binary state with its energy and how often it occurred.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: Vec<bool>,
    pub energy: f64,
    pub multiplicity: u64,
}

/// A batch of measurements, sorted ascending by energy (ties broken by
/// state), with identical states folded into one record.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    samples: Vec<Sample>,
    /// Reads requested from the backend. For the exhaustive backend this is
    /// the number of states retained.
    pub reads: u64,
    pub seed: Option<u64>,
    pub backend: String,
}

impl SampleSet {
    /// Builds a sorted, multiplicity-folded set from raw records.
    pub fn from_records(
        records: Vec<(Vec<bool>, f64)>,
        reads: u64,
        seed: Option<u64>,
        backend: impl Into<String>,
    ) -> Self {
        let mut merged: std::collections::HashMap<Vec<bool>, (f64, u64)> =
            std::collections::HashMap::new();
        for (state, energy) in records {
            let entry = merged.entry(state).or_insert((energy, 0));
            entry.1 += 1;
        }
        let mut samples: Vec<Sample> = merged
            .into_iter()
            .map(|(state, (energy, multiplicity))| Sample {
                state,
                energy,
                multiplicity,
            })
            .collect();
        samples.sort_by(|a, b| {
            a.energy
                .partial_cmp(&b.energy)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.state.cmp(&b.state))
        });
        SampleSet {
            samples,
            reads,
            seed,
            backend: backend.into(),
        }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Lowest-energy sample.
    pub fn best(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn best_energy(&self) -> Option<f64> {
        self.samples.first().map(|s| s.energy)
    }

    /// Total number of measurements (sum of multiplicities).
    pub fn total_reads(&self) -> u64 {
        self.samples.iter().map(|s| s.multiplicity).sum()
    }

    /// Samples with energy within `window` of the best one.
    pub fn within_window(&self, window: f64) -> impl Iterator<Item = &Sample> {
        let cutoff = self.best_energy().map(|e| e + window);
        self.samples
            .iter()
            .take_while(move |s| cutoff.is_some_and(|c| s.energy <= c))
    }
}

/// A backend that measures low-energy states of a QUBO.
pub trait Sampler {
    fn sample(&self, qubo: &Qubo) -> Result<SampleSet>;
    fn name(&self) -> &'static str;
}

/// Fraction of reads with energy within `tol` of `reference_energy`,
/// weighted by multiplicity. Empty sets yield 0.
pub fn solution_probability(samples: &SampleSet, reference_energy: f64, tol: f64) -> f64 {
    let total = samples.total_reads();
    if total == 0 {
        return 0.0;
    }
    let hits: u64 = samples
        .samples()
        .iter()
        .filter(|s| s.energy <= reference_energy + tol)
        .map(|s| s.multiplicity)
        .sum();
    hits as f64 / total as f64
}

/// Multiplicity-weighted histogram with bins aligned to multiples of
/// `bin_width`; returns `(bin_lower_edge, count)` sorted by edge.
pub fn energy_histogram(samples: &SampleSet, bin_width: f64) -> Result<Vec<(f64, u64)>> {
    if bin_width.is_nan() || bin_width <= 0.0 {
        return Err(Error::Parameter(format!(
            "histogram bin width must be positive, got {bin_width}"
        )));
    }
    let mut bins: std::collections::BTreeMap<i64, u64> = std::collections::BTreeMap::new();
    for s in samples.samples() {
        let idx = (s.energy / bin_width).floor() as i64;
        *bins.entry(idx).or_insert(0) += s.multiplicity;
    }
    Ok(bins
        .into_iter()
        .map(|(idx, count)| (idx as f64 * bin_width, count))
        .collect())
}

/// Deterministically derives a child seed from a base seed and a salt.
/// SplitMix64 finalizer; used so nested solves stay reproducible.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
