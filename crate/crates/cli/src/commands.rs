//! Subcommand implementations. Every command resolves its configuration,
//! echoes it to `config.json` in the output directory, and writes its
//! artifacts under fixed names.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

use qubotrack_core::formats;
use qubotrack_core::lagrangian::{optimize_multipliers, MultiplierConfig};
use qubotrack_core::model::ProblemSpec;
use qubotrack_core::pipeline::{
    self, evaluate, generate_scenario, lambda_sweep, Scenario, ScenarioParams, SegmentReport,
    SweepConfig, SweepMode, TrackConfig, TrackSet,
};
use qubotrack_core::qubo::{apply_penalties, build_cost, regularize, to_spin, ConstraintSystem};
use qubotrack_core::sampler::{
    anneal, anneal_spin, energy_histogram, AnnealSchedule, Annealer, BruteForce, SampleSet,
    Sampler,
};
use qubotrack_core::{Error, Result};

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

fn write_config<T: Serialize>(dir: &Path, command: &str, config: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Echo<'a, T> {
        format_version: u32,
        command: &'a str,
        #[serde(flatten)]
        config: &'a T,
    }
    let path = dir.join("config.json");
    let mut text = serde_json::to_string_pretty(&Echo {
        format_version: formats::FORMAT_VERSION,
        command,
        config,
    })
    .map_err(|e| Error::Format(format!("config echo failed: {e}")))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

#[derive(Args, Serialize)]
pub struct SynthArgs {
    /// Ground-truth objects per frame.
    #[arg(long, default_value_t = 3)]
    objects: usize,
    #[arg(long, default_value_t = 5)]
    frames: usize,
    /// Standard deviation of the Gaussian similarity noise.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep detections in object order instead of permuting them per frame.
    #[arg(long, default_value_t = false)]
    no_shuffle: bool,
    /// Real tracks to model (default: objects + 1).
    #[arg(long)]
    tracks: Option<usize>,
    #[arg(long, default_value_t = 3)]
    max_frame_gap: usize,
    /// Score for labeling a detection as a false positive.
    #[arg(long, default_value_t = -0.2, allow_hyphen_values = true)]
    beta: f64,
}

pub fn run_synth(out_dir: &Path, args: SynthArgs) -> Result<()> {
    ensure_dir(out_dir)?;
    let params = ScenarioParams {
        num_objects: args.objects,
        num_frames: args.frames,
        sigma: args.sigma,
        seed: args.seed,
        shuffle: !args.no_shuffle,
        max_frame_gap: args.max_frame_gap,
        num_real_tracks: args.tracks,
        false_positive_bonus: args.beta,
    };
    let scenario = generate_scenario(&params)?;
    let path = out_dir.join("scenario.json");
    formats::write_scenario(&path, &scenario)?;
    write_config(out_dir, "synth", &args)?;
    println!(
        "scenario: objects={} frames={} sigma={} seed={} tracks={} similarities={} -> {}",
        args.objects,
        args.frames,
        args.sigma,
        args.seed,
        scenario.spec.num_real_tracks(),
        scenario.spec.num_similarities(),
        path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuboForm {
    Binary,
    Spin,
}

#[derive(Args, Serialize)]
pub struct BuildArgs {
    /// Scenario or problem JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Emit the binary or the spin form.
    #[arg(long, value_enum, default_value_t = QuboForm::Binary)]
    form: QuboForm,
    /// Uniform penalty multiplier for all constraints.
    #[arg(long, conflicts_with = "optimize_lambda")]
    lambda: Option<f64>,
    /// Estimate per-constraint multipliers adaptively.
    #[arg(long, default_value_t = false)]
    optimize_lambda: bool,
    #[arg(long, default_value_t = 0.5)]
    lambda_base: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda_off: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Energy window for merging near-optimal samples during estimation.
    #[arg(long, default_value_t = 0.5)]
    window: f64,
    #[arg(long, default_value_t = 20)]
    max_iterations: u32,
    /// Reads per estimation solve (annealing path).
    #[arg(long, default_value_t = 512)]
    reads: u32,
    #[arg(long, default_value_t = 200)]
    sweeps: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Diagonal regularization constant.
    #[arg(long)]
    regularize: Option<f64>,
    /// Variable cap for the exhaustive estimation solver.
    #[arg(long, default_value_t = 24)]
    brute_cap: usize,
}

pub fn run_build(out_dir: &Path, args: BuildArgs) -> Result<()> {
    ensure_dir(out_dir)?;
    if let Some(lambda) = args.lambda {
        if lambda < 0.0 {
            return Err(Error::Parameter(format!(
                "--lambda must be nonnegative, got {lambda}"
            )));
        }
    }
    let (spec, _) = formats::read_problem_or_scenario(&args.input)?;
    let cost = build_cost(&spec);
    let constraints = ConstraintSystem::for_spec(&spec);

    let mut multiplier_state = None;
    let mut qubo = if args.optimize_lambda {
        let config = MultiplierConfig {
            lambda_base: args.lambda_base,
            epsilon: args.epsilon,
            energy_window: args.window,
            lambda_offset: args.lambda_off,
            max_iterations: args.max_iterations,
        };
        let solver = auto_solver(
            spec.num_variables(),
            args.brute_cap,
            args.reads,
            args.sweeps,
            args.seed,
        );
        let state = optimize_multipliers(&cost, &constraints, solver.as_ref(), &config)?;
        let penalized = apply_penalties(&cost, &state.apply(&constraints)?)?;
        multiplier_state = Some(state);
        penalized
    } else if let Some(lambda) = args.lambda {
        apply_penalties(&cost, &constraints.with_uniform_multiplier(lambda))?
    } else {
        cost
    };

    if let Some(e) = args.regularize {
        qubo = regularize(&qubo, &spec, e)?;
    }

    let path = out_dir.join("qubo.json");
    match args.form {
        QuboForm::Binary => formats::write_qubo(&path, &qubo, Some(&spec))?,
        QuboForm::Spin => formats::write_ising(&path, &to_spin(&qubo), Some(&spec))?,
    }
    if let Some(state) = &multiplier_state {
        formats::write_multipliers(&out_dir.join("multipliers.json"), state)?;
    }
    write_config(out_dir, "build", &args)?;
    println!(
        "qubo: n={} quadratic_terms={} form={} -> {}",
        qubo.num_variables(),
        qubo.num_quadratic_terms(),
        match args.form {
            QuboForm::Binary => "binary",
            QuboForm::Spin => "spin",
        },
        path.display()
    );
    if let Some(state) = &multiplier_state {
        println!(
            "multipliers: converged={} iterations={}",
            state.converged, state.iterations
        );
    }
    Ok(())
}

fn auto_solver(
    num_variables: usize,
    brute_cap: usize,
    reads: u32,
    sweeps: u32,
    seed: u64,
) -> Box<dyn Sampler> {
    if num_variables <= brute_cap {
        Box::new(BruteForce {
            max_variables: brute_cap,
            ..BruteForce::default()
        })
    } else {
        Box::new(Annealer::new(AnnealSchedule {
            sweeps,
            initial_temperature: None,
            final_temperature: 0.05,
            reads,
            seed,
        }))
    }
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveBackend {
    Anneal,
    Brute,
}

#[derive(Args, Serialize)]
pub struct SolveArgs {
    /// QUBO/Ising JSON file produced by `build`.
    #[arg(long)]
    qubo: PathBuf,
    /// Scenario file with ground truth; enables metrics.json.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SolveBackend::Anneal)]
    backend: SolveBackend,
    #[arg(long, default_value_t = 4096)]
    reads: u32,
    #[arg(long, default_value_t = 1000)]
    sweeps: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Histogram bin width.
    #[arg(long, default_value_t = 1.0)]
    bin_width: f64,
    /// Variable cap for the exhaustive backend.
    #[arg(long, default_value_t = 24)]
    brute_cap: usize,
}

pub fn run_solve(out_dir: &Path, args: SolveArgs) -> Result<()> {
    ensure_dir(out_dir)?;
    let file = formats::read_qubo_file(&args.qubo)?;
    let label_spec = file.label_spec()?;
    let loaded = file.load()?;

    let samples: SampleSet = match (&loaded, args.backend) {
        (formats::LoadedQubo::Binary(qubo), SolveBackend::Anneal) => anneal(
            qubo,
            &AnnealSchedule {
                sweeps: args.sweeps,
                initial_temperature: None,
                final_temperature: 0.05,
                reads: args.reads,
                seed: args.seed,
            },
        )?,
        (formats::LoadedQubo::Binary(qubo), SolveBackend::Brute) => BruteForce {
            max_variables: args.brute_cap,
            ..BruteForce::default()
        }
        .sample(qubo)?,
        (formats::LoadedQubo::Spin(ising), SolveBackend::Anneal) => anneal_spin(
            ising,
            &AnnealSchedule {
                sweeps: args.sweeps,
                initial_temperature: None,
                final_temperature: 0.05,
                reads: args.reads,
                seed: args.seed,
            },
        )?,
        (formats::LoadedQubo::Spin(_), SolveBackend::Brute) => {
            return Err(Error::Parameter(
                "the exhaustive backend needs the binary form; rebuild with --form binary".into(),
            ))
        }
    };

    formats::write_samples_csv(&out_dir.join("samples.csv"), &samples)?;
    let histogram = energy_histogram(&samples, args.bin_width)?;
    formats::write_histogram_csv(&out_dir.join("histogram.csv"), &histogram)?;
    write_config(out_dir, "solve", &args)?;
    println!(
        "samples: reads={} distinct={} best_energy={}",
        samples.total_reads(),
        samples.len(),
        samples.best_energy().unwrap_or(f64::NAN)
    );

    // Track decoding needs variable labels. The best feasible sample is
    // decoded; with none, the sample outputs above still stand.
    let Some(spec) = label_spec else {
        return Ok(());
    };
    let constraints = ConstraintSystem::for_spec(&spec);
    let feasible = samples
        .samples()
        .iter()
        .find(|s| constraints.is_feasible(&s.state));
    let Some(best) = feasible else {
        return Err(Error::Infeasible(
            "no sampled state satisfies the constraints; raise --reads or the multipliers".into(),
        ));
    };
    let tracks = single_problem_tracks(&best.state, &spec, best.energy, &samples)?;
    formats::write_tracks_csv(&out_dir.join("tracks.csv"), &tracks)?;
    println!("tracks: {} ids -> {}", tracks.num_tracks, out_dir.join("tracks.csv").display());

    if let Some(scenario_path) = &args.scenario {
        let scenario = formats::read_scenario(scenario_path)?;
        let metrics = evaluate(&tracks, &scenario)?;
        write_metrics(out_dir, &metrics)?;
    }
    Ok(())
}

/// Wraps a single decoded solve as a one-segment track set.
fn single_problem_tracks(
    state: &[bool],
    spec: &ProblemSpec,
    energy: f64,
    samples: &SampleSet,
) -> Result<TrackSet> {
    let (assignment, report) = qubotrack_core::model::decode(state, spec)?;
    debug_assert!(report.is_feasible());
    let mut local = vec![vec![None; spec.num_real_detections()]; spec.num_frames()];
    for (frame, row) in local.iter_mut().enumerate() {
        for (det, slot) in row.iter_mut().enumerate() {
            *slot = assignment
                .track_of(frame, det)
                .filter(|&t| t < spec.num_real_tracks());
        }
    }
    // Renumber used tracks in first-appearance order.
    let mut remap: std::collections::HashMap<usize, u64> = std::collections::HashMap::new();
    let mut next = 0u64;
    let assignments: Vec<Vec<Option<u64>>> = local
        .iter()
        .map(|row| {
            row.iter()
                .map(|t| {
                    t.map(|t| {
                        *remap.entry(t).or_insert_with(|| {
                            let v = next;
                            next += 1;
                            v
                        })
                    })
                })
                .collect()
        })
        .collect();
    Ok(TrackSet {
        assignments,
        segments: vec![SegmentReport {
            index: 0,
            start_frame: 0,
            end_frame: spec.num_frames(),
            best_energy: energy,
            solution_probability: qubotrack_core::sampler::solution_probability(
                samples, energy, 1e-9,
            ),
            repaired: false,
            multiplier_converged: true,
            assignment: local,
        }],
        stitches: Vec::new(),
        num_tracks: next,
    })
}

fn write_metrics(out_dir: &Path, metrics: &pipeline::Metrics) -> Result<()> {
    let path = out_dir.join("metrics.json");
    let mut text = serde_json::to_string_pretty(metrics)
        .map_err(|e| Error::Format(format!("metrics serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))?;
    println!(
        "metrics: accuracy={} id_switches={} fp_labels={}",
        metrics.detection_accuracy, metrics.id_switches, metrics.false_positive_labels
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepModeArg {
    Fixed,
    Optimized,
}

#[derive(Args, Serialize)]
pub struct SweepArgs {
    /// Scenario file to sweep on.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = SweepModeArg::Fixed)]
    mode: SweepModeArg,
    /// Range start (multiplier or offset).
    #[arg(long, default_value_t = 0.0)]
    from: f64,
    /// Range end, inclusive.
    #[arg(long, default_value_t = 5.0)]
    to: f64,
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    #[arg(long, default_value_t = 4096)]
    reads: u32,
    #[arg(long, default_value_t = 100)]
    sweeps: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    lambda_base: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    window: f64,
    #[arg(long, default_value_t = 512)]
    optimize_reads: u32,
    /// Also write sweep_probability.svg and sweep_energy.svg.
    #[arg(long, default_value_t = false)]
    svg: bool,
}

pub fn run_sweep(out_dir: &Path, args: SweepArgs) -> Result<()> {
    ensure_dir(out_dir)?;
    if args.step.is_nan() || args.step <= 0.0 {
        return Err(Error::Parameter(format!(
            "--step must be positive, got {}",
            args.step
        )));
    }
    if args.to < args.from {
        return Err(Error::Parameter(format!(
            "empty sweep range: --from {} exceeds --to {}",
            args.from, args.to
        )));
    }
    let mut values = Vec::new();
    let mut v = args.from;
    while v <= args.to + 1e-12 {
        values.push(v);
        v += args.step;
    }

    let scenario = formats::read_scenario(&args.scenario)?;
    let config = SweepConfig {
        mode: match args.mode {
            SweepModeArg::Fixed => SweepMode::Fixed,
            SweepModeArg::Optimized => SweepMode::Optimized,
        },
        values,
        reads: args.reads,
        sweeps: args.sweeps,
        seed: args.seed,
        optimize_reads: args.optimize_reads,
        multipliers: MultiplierConfig {
            lambda_base: args.lambda_base,
            epsilon: args.epsilon,
            energy_window: args.window,
            ..MultiplierConfig::default()
        },
        ..SweepConfig::default()
    };
    let report = lambda_sweep(&scenario, &config)?;

    formats::write_sweep_csv(&out_dir.join("sweep.csv"), &report)?;
    if let Some(state) = &report.multiplier_state {
        formats::write_multipliers(&out_dir.join("multipliers.json"), state)?;
    }
    write_config(out_dir, "sweep", &args)?;

    let x_label = match report.mode {
        SweepMode::Fixed => "lambda",
        SweepMode::Optimized => "lambda_off",
    };
    if args.svg {
        let probability: Vec<(f64, f64)> = report
            .rows
            .iter()
            .map(|r| (r.value, r.solution_probability))
            .collect();
        let energy: Vec<(f64, f64)> = report
            .rows
            .iter()
            .map(|r| (r.value, r.best_energy))
            .collect();
        let reference = report.rows.first().map(|r| r.reference_energy);
        svg_title_charts(out_dir, x_label, &probability, &energy, reference, &scenario)?;
    }
    let peak = report
        .rows
        .iter()
        .map(|r| r.solution_probability)
        .fold(0.0f64, f64::max);
    println!(
        "sweep: mode={x_label} points={} peak_probability={} reference={:?}",
        report.rows.len(),
        peak,
        report.reference
    );
    Ok(())
}

fn svg_title_charts(
    out_dir: &Path,
    x_label: &str,
    probability: &[(f64, f64)],
    energy: &[(f64, f64)],
    reference: Option<f64>,
    scenario: &Scenario,
) -> Result<()> {
    let title = format!(
        "sigma = {}, {} objects, {} frames",
        scenario.params.sigma, scenario.params.num_objects, scenario.params.num_frames
    );
    crate::svg::probability_chart(
        &out_dir.join("sweep_probability.svg"),
        &title,
        x_label,
        probability,
    )?;
    crate::svg::energy_chart(
        &out_dir.join("sweep_energy.svg"),
        &title,
        x_label,
        energy,
        reference,
    )
}

// ---------------------------------------------------------------------------
// track
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackBackend {
    Auto,
    Anneal,
    Brute,
}

#[derive(Args, Serialize)]
pub struct TrackArgs {
    /// Scenario or problem JSON file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 5)]
    segment_length: usize,
    /// Frames shared between consecutive segments (default: max frame gap).
    #[arg(long)]
    overlap: Option<usize>,
    #[arg(long, value_enum, default_value_t = TrackBackend::Auto)]
    backend: TrackBackend,
    #[arg(long, default_value_t = 512)]
    reads: u32,
    #[arg(long, default_value_t = 200)]
    sweeps: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed uniform multiplier instead of adaptive estimation.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    lambda_base: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda_off: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    window: f64,
    #[arg(long, default_value_t = 20)]
    max_iterations: u32,
    /// Diagonal regularization constant.
    #[arg(long)]
    regularize: Option<f64>,
    #[arg(long, default_value_t = 24)]
    brute_cap: usize,
}

pub fn run_track(out_dir: &Path, args: TrackArgs) -> Result<()> {
    ensure_dir(out_dir)?;
    let (spec, scenario) = formats::read_problem_or_scenario(&args.input)?;
    let config = TrackConfig {
        segment_length: args.segment_length,
        overlap: args.overlap,
        backend: match args.backend {
            TrackBackend::Auto => pipeline::SolverBackend::Auto,
            TrackBackend::Anneal => pipeline::SolverBackend::Anneal,
            TrackBackend::Brute => pipeline::SolverBackend::Brute,
        },
        reads: args.reads,
        sweeps: args.sweeps,
        seed: args.seed,
        optimize_lambda: args.lambda.is_none(),
        fixed_lambda: args.lambda.unwrap_or(3.0),
        multipliers: MultiplierConfig {
            lambda_base: args.lambda_base,
            epsilon: args.epsilon,
            energy_window: args.window,
            lambda_offset: args.lambda_off,
            max_iterations: args.max_iterations,
        },
        regularization: args.regularize.unwrap_or(0.0),
        brute_cap: args.brute_cap,
        ..TrackConfig::default()
    };
    let tracks = pipeline::track(&spec, &config)?;

    formats::write_tracks_csv(&out_dir.join("tracks.csv"), &tracks)?;
    formats::write_segments_csv(&out_dir.join("segments.csv"), &tracks.segments)?;
    write_config(out_dir, "track", &args)?;
    println!(
        "tracks: segments={} ids={} -> {}",
        tracks.segments.len(),
        tracks.num_tracks,
        out_dir.join("tracks.csv").display()
    );
    if let Some(scenario) = scenario {
        let metrics = evaluate(&tracks, &scenario)?;
        write_metrics(out_dir, &metrics)?;
    }
    Ok(())
}
