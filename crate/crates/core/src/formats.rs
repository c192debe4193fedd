//! Versioned interchange formats: JSON documents for problems, scenarios,
//! QUBO/Ising forms, and multiplier states, plus the CSV exports. Readers
//! reject unknown `format_version` values.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrangian::MultiplierState;
use crate::model::ProblemSpec;
use crate::pipeline::{Scenario, ScenarioParams, SegmentReport, SweepMode, SweepReport, TrackSet};
use crate::qubo::{IsingProblem, Qubo};
use crate::sampler::SampleSet;

pub const FORMAT_VERSION: u32 = 1;

fn check_version(version: u32, kind_found: &str, kind_expected: &str) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format_version {version}, expected {FORMAT_VERSION}"
        )));
    }
    if kind_found != kind_expected {
        return Err(Error::Format(format!(
            "expected a \"{kind_expected}\" document, found \"{kind_found}\""
        )));
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Problem file
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SimilarityRecord {
    f_i: usize,
    d_i: usize,
    f_j: usize,
    d_j: usize,
    score: f64,
}

/// On-disk form of a [`ProblemSpec`]. `detections_per_frame` and `tracks`
/// count the real slots; the dummy detection and dummy track are implicit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub format_version: u32,
    pub kind: String,
    pub frames: usize,
    pub detections_per_frame: usize,
    pub tracks: usize,
    pub max_frame_gap: usize,
    pub beta: f64,
    similarities: Vec<SimilarityRecord>,
}

impl ProblemFile {
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        ProblemFile {
            format_version: FORMAT_VERSION,
            kind: "problem".into(),
            frames: spec.num_frames(),
            detections_per_frame: spec.num_real_detections(),
            tracks: spec.num_real_tracks(),
            max_frame_gap: spec.max_frame_gap(),
            beta: spec.false_positive_bonus(),
            similarities: spec
                .similarities()
                .map(|(key, &score)| SimilarityRecord {
                    f_i: key.frame_i,
                    d_i: key.det_i,
                    f_j: key.frame_j,
                    d_j: key.det_j,
                    score,
                })
                .collect(),
        }
    }

    pub fn to_spec(&self) -> Result<ProblemSpec> {
        check_version(self.format_version, &self.kind, "problem")?;
        let mut spec = ProblemSpec::new(
            self.frames,
            self.detections_per_frame,
            self.tracks,
            self.max_frame_gap,
            self.beta,
        )?;
        for record in &self.similarities {
            spec.set_similarity(record.f_i, record.d_i, record.f_j, record.d_j, record.score)?;
        }
        Ok(spec)
    }
}

pub fn write_problem(path: &Path, spec: &ProblemSpec) -> Result<()> {
    write_json(path, &ProblemFile::from_spec(spec))
}

pub fn read_problem(path: &Path) -> Result<ProblemSpec> {
    read_json::<ProblemFile>(path)?.to_spec()
}

// ---------------------------------------------------------------------------
// Scenario file
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub format_version: u32,
    pub kind: String,
    pub params: ScenarioParams,
    /// `ground_truth[frame][detection] = object id`.
    pub ground_truth: Vec<Vec<usize>>,
    pub problem: ProblemFile,
}

impl ScenarioFile {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        ScenarioFile {
            format_version: FORMAT_VERSION,
            kind: "scenario".into(),
            params: scenario.params.clone(),
            ground_truth: scenario.ground_truth.clone(),
            problem: ProblemFile::from_spec(&scenario.spec),
        }
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        check_version(self.format_version, &self.kind, "scenario")?;
        Ok(Scenario {
            params: self.params.clone(),
            ground_truth: self.ground_truth.clone(),
            spec: self.problem.to_spec()?,
        })
    }
}

pub fn write_scenario(path: &Path, scenario: &Scenario) -> Result<()> {
    write_json(path, &ScenarioFile::from_scenario(scenario))
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    read_json::<ScenarioFile>(path)?.to_scenario()
}

/// Reads either a scenario or a bare problem file, returning the spec and
/// the scenario when ground truth is available.
pub fn read_problem_or_scenario(path: &Path) -> Result<(ProblemSpec, Option<Scenario>)> {
    #[derive(Deserialize)]
    struct KindProbe {
        kind: String,
    }
    let probe: KindProbe = read_json(path)?;
    match probe.kind.as_str() {
        "scenario" => {
            let scenario = read_scenario(path)?;
            Ok((scenario.spec.clone(), Some(scenario)))
        }
        "problem" => Ok((read_problem(path)?, None)),
        other => Err(Error::Format(format!(
            "expected a \"problem\" or \"scenario\" document, found \"{other}\""
        ))),
    }
}

// ---------------------------------------------------------------------------
// QUBO / Ising file
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct QuadraticRecord {
    i: usize,
    j: usize,
    value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VariableLabel {
    flat: usize,
    frame: usize,
    detection: usize,
    track: usize,
}

/// On-disk form of a binary or spin problem; `kind` is `"qubo"` or
/// `"ising"`. For the spin form `linear` holds the fields and `quadratic`
/// the couplings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuboFile {
    pub format_version: u32,
    pub kind: String,
    pub n: usize,
    pub offset: f64,
    pub linear: Vec<f64>,
    quadratic: Vec<QuadraticRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variable_labels: Option<Vec<VariableLabel>>,
}

/// A problem loaded from a QUBO file, in whichever form it was stored.
#[derive(Debug, Clone)]
pub enum LoadedQubo {
    Binary(Qubo),
    Spin(IsingProblem),
}

impl QuboFile {
    pub fn from_qubo(qubo: &Qubo, labels: Option<&ProblemSpec>) -> Self {
        QuboFile {
            format_version: FORMAT_VERSION,
            kind: "qubo".into(),
            n: qubo.num_variables(),
            offset: qubo.offset(),
            linear: qubo.linear().to_vec(),
            quadratic: qubo
                .quadratic()
                .map(|(&(i, j), &value)| QuadraticRecord { i, j, value })
                .collect(),
            variable_labels: labels.map(labels_of),
        }
    }

    pub fn from_ising(ising: &IsingProblem, labels: Option<&ProblemSpec>) -> Self {
        QuboFile {
            format_version: FORMAT_VERSION,
            kind: "ising".into(),
            n: ising.num_variables(),
            offset: ising.offset(),
            linear: ising.fields().to_vec(),
            quadratic: ising
                .couplings()
                .map(|(&(i, j), &value)| QuadraticRecord { i, j, value })
                .collect(),
            variable_labels: labels.map(labels_of),
        }
    }

    pub fn load(&self) -> Result<LoadedQubo> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format_version {}, expected {FORMAT_VERSION}",
                self.format_version
            )));
        }
        if self.linear.len() != self.n {
            return Err(Error::Format(format!(
                "linear vector has {} entries for n = {}",
                self.linear.len(),
                self.n
            )));
        }
        match self.kind.as_str() {
            "qubo" => {
                let mut qubo = Qubo::new(self.n);
                for (i, &b) in self.linear.iter().enumerate() {
                    if b != 0.0 {
                        qubo.add_linear(i, b);
                    }
                }
                for record in &self.quadratic {
                    if record.i >= self.n || record.j >= self.n {
                        return Err(Error::Format("quadratic index out of range".into()));
                    }
                    qubo.add_quadratic(record.i, record.j, record.value);
                }
                qubo.add_offset(self.offset);
                Ok(LoadedQubo::Binary(qubo))
            }
            "ising" => {
                let mut couplings = std::collections::BTreeMap::new();
                for record in &self.quadratic {
                    if record.i >= self.n || record.j >= self.n || record.i == record.j {
                        return Err(Error::Format("coupling index invalid".into()));
                    }
                    let key = if record.i < record.j {
                        (record.i, record.j)
                    } else {
                        (record.j, record.i)
                    };
                    *couplings.entry(key).or_insert(0.0) += record.value;
                }
                Ok(LoadedQubo::Spin(IsingProblem::from_parts(
                    self.n,
                    couplings,
                    self.linear.clone(),
                    self.offset,
                )))
            }
            other => Err(Error::Format(format!(
                "expected a \"qubo\" or \"ising\" document, found \"{other}\""
            ))),
        }
    }

    /// Minimal spec reconstructed from the variable labels, usable for
    /// decoding states back into assignments.
    pub fn label_spec(&self) -> Result<Option<ProblemSpec>> {
        let Some(labels) = &self.variable_labels else {
            return Ok(None);
        };
        let frames = labels.iter().map(|l| l.frame).max().map_or(0, |m| m + 1);
        let dets = labels.iter().map(|l| l.detection).max().map_or(0, |m| m + 1);
        let tracks = labels.iter().map(|l| l.track).max().map_or(0, |m| m + 1);
        if dets < 2 || tracks < 2 || frames < 1 {
            return Err(Error::Format("variable labels describe no real slots".into()));
        }
        let spec = ProblemSpec::new(frames, dets - 1, tracks - 1, frames, 0.0)?;
        if spec.num_variables() != self.n {
            return Err(Error::Format(format!(
                "labels describe {} variables but n = {}",
                spec.num_variables(),
                self.n
            )));
        }
        Ok(Some(spec))
    }
}

fn labels_of(spec: &ProblemSpec) -> Vec<VariableLabel> {
    (0..spec.num_variables())
        .map(|flat| {
            let v = spec.unflatten(flat).expect("in range");
            VariableLabel {
                flat,
                frame: v.frame,
                detection: v.detection,
                track: v.track,
            }
        })
        .collect()
}

pub fn write_qubo(path: &Path, qubo: &Qubo, labels: Option<&ProblemSpec>) -> Result<()> {
    write_json(path, &QuboFile::from_qubo(qubo, labels))
}

pub fn write_ising(path: &Path, ising: &IsingProblem, labels: Option<&ProblemSpec>) -> Result<()> {
    write_json(path, &QuboFile::from_ising(ising, labels))
}

pub fn read_qubo_file(path: &Path) -> Result<QuboFile> {
    read_json(path)
}

// ---------------------------------------------------------------------------
// Multiplier state file
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiplierFile {
    pub format_version: u32,
    pub kind: String,
    pub lambda_base: f64,
    pub lambda_off: f64,
    pub lambda_prime: Vec<f64>,
    pub converged: bool,
    pub iterations: u32,
}

impl MultiplierFile {
    pub fn from_state(state: &MultiplierState) -> Self {
        MultiplierFile {
            format_version: FORMAT_VERSION,
            kind: "multipliers".into(),
            lambda_base: state.lambda_base,
            lambda_off: state.lambda_offset,
            lambda_prime: state.lambda_prime.clone(),
            converged: state.converged,
            iterations: state.iterations,
        }
    }

    pub fn to_state(&self) -> Result<MultiplierState> {
        check_version(self.format_version, &self.kind, "multipliers")?;
        Ok(MultiplierState {
            lambda_base: self.lambda_base,
            lambda_prime: self.lambda_prime.clone(),
            lambda_offset: self.lambda_off,
            iterations: self.iterations,
            converged: self.converged,
        })
    }
}

pub fn write_multipliers(path: &Path, state: &MultiplierState) -> Result<()> {
    write_json(path, &MultiplierFile::from_state(state))
}

pub fn read_multipliers(path: &Path) -> Result<MultiplierState> {
    read_json::<MultiplierFile>(path)?.to_state()
}

// ---------------------------------------------------------------------------
// CSV exports
// ---------------------------------------------------------------------------

fn write_csv(path: &Path, render: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
    let mut buffer = Vec::new();
    render(&mut buffer).map_err(|e| Error::io(path.display().to_string(), e))?;
    fs::write(path, buffer).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Columns: `state` (bitstring, variable 0 leftmost), `energy`,
/// `multiplicity`.
pub fn write_samples_csv(path: &Path, samples: &SampleSet) -> Result<()> {
    write_csv(path, |out| {
        writeln!(out, "state,energy,multiplicity")?;
        for s in samples.samples() {
            let bits: String = s.state.iter().map(|&b| if b { '1' } else { '0' }).collect();
            writeln!(out, "{bits},{},{}", s.energy, s.multiplicity)?;
        }
        Ok(())
    })
}

/// Columns: `bin_lower`, `count`.
pub fn write_histogram_csv(path: &Path, histogram: &[(f64, u64)]) -> Result<()> {
    write_csv(path, |out| {
        writeln!(out, "bin_lower,count")?;
        for (edge, count) in histogram {
            writeln!(out, "{edge},{count}")?;
        }
        Ok(())
    })
}

/// Columns: `frame`, `detection`, `global_track_id` (-1 for false
/// positives).
pub fn write_tracks_csv(path: &Path, tracks: &TrackSet) -> Result<()> {
    write_csv(path, |out| {
        writeln!(out, "frame,detection,global_track_id")?;
        for (frame, row) in tracks.assignments.iter().enumerate() {
            for (det, id) in row.iter().enumerate() {
                match id {
                    Some(id) => writeln!(out, "{frame},{det},{id}")?,
                    None => writeln!(out, "{frame},{det},-1")?,
                }
            }
        }
        Ok(())
    })
}

/// Columns: the sweep value (named `lambda` or `lambda_off` by mode),
/// `sigma`, `reads`, `solution_probability`, `best_energy`,
/// `reference_energy`.
pub fn write_sweep_csv(path: &Path, report: &SweepReport) -> Result<()> {
    write_csv(path, |out| {
        let value_column = match report.mode {
            SweepMode::Fixed => "lambda",
            SweepMode::Optimized => "lambda_off",
        };
        writeln!(
            out,
            "{value_column},sigma,reads,solution_probability,best_energy,reference_energy"
        )?;
        for row in &report.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                row.value,
                row.sigma,
                row.reads,
                row.solution_probability,
                row.best_energy,
                row.reference_energy
            )?;
        }
        Ok(())
    })
}

/// Columns: `segment`, `start_frame`, `end_frame`, `best_energy`,
/// `solution_probability`, `repaired`, `multiplier_converged`.
pub fn write_segments_csv(path: &Path, segments: &[SegmentReport]) -> Result<()> {
    write_csv(path, |out| {
        writeln!(
            out,
            "segment,start_frame,end_frame,best_energy,solution_probability,repaired,multiplier_converged"
        )?;
        for s in segments {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.index,
                s.start_frame,
                s.end_frame,
                s.best_energy,
                s.solution_probability,
                s.repaired,
                s.multiplier_converged
            )?;
        }
        Ok(())
    })
}
