//! End-to-end checks of the binary: determinism, exit codes, and file
//! handling.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qubotrack"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("qubotrack-cli-tests")
        .join(format!("{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_success(output: &Output) {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn synth(dir: &Path, sigma: &str, seed: &str) {
    let out = run(&[
        "synth",
        "--objects",
        "2",
        "--frames",
        "4",
        "--sigma",
        sigma,
        "--seed",
        seed,
        "--max-frame-gap",
        "2",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_success(&out);
}

#[test]
fn synth_is_byte_deterministic() {
    let a = tmp_dir("synth-a");
    let b = tmp_dir("synth-b");
    synth(&a, "0.6", "9");
    synth(&b, "0.6", "9");
    let left = std::fs::read(a.join("scenario.json")).unwrap();
    let right = std::fs::read(b.join("scenario.json")).unwrap();
    assert_eq!(left, right);

    let c = tmp_dir("synth-c");
    synth(&c, "0.6", "10");
    let other = std::fs::read(c.join("scenario.json")).unwrap();
    assert_ne!(left, other);
}

#[test]
fn full_pipeline_files_and_determinism() {
    let dir = tmp_dir("pipeline");
    synth(&dir, "0.2", "3");
    let scenario = dir.join("scenario.json");

    for (sub, form) in [("qb", "binary"), ("qs", "spin")] {
        let out_dir = dir.join(sub);
        let out = run(&[
            "build",
            "--input",
            scenario.to_str().unwrap(),
            "--lambda",
            "2.5",
            "--form",
            form,
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_success(&out);
        let text = std::fs::read_to_string(out_dir.join("qubo.json")).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let expected_kind = if form == "binary" { "qubo" } else { "ising" };
        assert_eq!(value["kind"], expected_kind);
        assert_eq!(value["format_version"], 1);
    }

    // Solving the binary form twice with one seed is byte-deterministic.
    let qubo = dir.join("qb/qubo.json");
    for sub in ["s1", "s2"] {
        let out_dir = dir.join(sub);
        let out = run(&[
            "solve",
            "--qubo",
            qubo.to_str().unwrap(),
            "--scenario",
            scenario.to_str().unwrap(),
            "--backend",
            "anneal",
            "--reads",
            "128",
            "--sweeps",
            "60",
            "--seed",
            "5",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_success(&out);
    }
    for file in ["samples.csv", "histogram.csv", "tracks.csv", "metrics.json", "config.json"] {
        let left = std::fs::read(dir.join("s1").join(file)).unwrap();
        let right = std::fs::read(dir.join("s2").join(file)).unwrap();
        assert_eq!(left, right, "{file} differs between identical runs");
    }
}

#[test]
fn track_on_noiseless_scenario_reports_perfect_metrics() {
    let dir = tmp_dir("track");
    synth(&dir, "0", "2");
    let out = run(&[
        "track",
        "--input",
        dir.join("scenario.json").to_str().unwrap(),
        "--segment-length",
        "3",
        "--overlap",
        "2",
        "--backend",
        "anneal",
        "--reads",
        "128",
        "--sweeps",
        "80",
        "--seed",
        "1",
        "--out-dir",
        dir.join("t").to_str().unwrap(),
    ]);
    assert_success(&out);
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("t/metrics.json")).unwrap())
            .unwrap();
    assert_eq!(metrics["detection_accuracy"], 1.0);
    assert_eq!(metrics["id_switches"], 0);
    let segments = std::fs::read_to_string(dir.join("t/segments.csv")).unwrap();
    assert!(segments.starts_with("segment,start_frame,end_frame"));
}

#[test]
fn sweep_rejects_empty_range_with_exit_2() {
    let dir = tmp_dir("sweep-bad");
    synth(&dir, "0.2", "4");
    let out = run(&[
        "sweep",
        "--scenario",
        dir.join("scenario.json").to_str().unwrap(),
        "--from",
        "5",
        "--to",
        "1",
        "--out-dir",
        dir.join("sw").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_emits_csv_and_svg() {
    let dir = tmp_dir("sweep");
    synth(&dir, "0.2", "4");
    let out = run(&[
        "sweep",
        "--scenario",
        dir.join("scenario.json").to_str().unwrap(),
        "--mode",
        "fixed",
        "--from",
        "1",
        "--to",
        "2",
        "--step",
        "1",
        "--reads",
        "64",
        "--sweeps",
        "50",
        "--seed",
        "8",
        "--svg",
        "--out-dir",
        dir.join("sw").to_str().unwrap(),
    ]);
    assert_success(&out);
    let csv = std::fs::read_to_string(dir.join("sw/sweep.csv")).unwrap();
    assert!(csv.starts_with("lambda,sigma,reads,solution_probability"));
    assert_eq!(csv.lines().count(), 3);
    let svg = std::fs::read_to_string(dir.join("sw/sweep_probability.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn brute_backend_solves_small_instances_exactly() {
    let dir = tmp_dir("brute-small");
    // 1 object over 3 frames with 1 real track: 3 * 2 * 2 = 12 variables.
    let out = run(&[
        "synth",
        "--objects",
        "1",
        "--frames",
        "3",
        "--sigma",
        "0.3",
        "--seed",
        "5",
        "--tracks",
        "1",
        "--max-frame-gap",
        "2",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_success(&out);
    let build = run(&[
        "build",
        "--input",
        dir.join("scenario.json").to_str().unwrap(),
        "--lambda",
        "3.0",
        "--out-dir",
        dir.join("q").to_str().unwrap(),
    ]);
    assert_success(&build);
    let solve = run(&[
        "solve",
        "--qubo",
        dir.join("q/qubo.json").to_str().unwrap(),
        "--scenario",
        dir.join("scenario.json").to_str().unwrap(),
        "--backend",
        "brute",
        "--out-dir",
        dir.join("s").to_str().unwrap(),
    ]);
    assert_success(&solve);
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("s/metrics.json")).unwrap())
            .unwrap();
    assert_eq!(metrics["detection_accuracy"], 1.0);
}

#[test]
fn brute_backend_over_cap_suggests_annealing_with_exit_2() {
    let dir = tmp_dir("brute-cap");
    synth(&dir, "0.2", "6");
    let build = run(&[
        "build",
        "--input",
        dir.join("scenario.json").to_str().unwrap(),
        "--lambda",
        "2.0",
        "--out-dir",
        dir.join("q").to_str().unwrap(),
    ]);
    assert_success(&build);
    // 2 objects over 4 frames with 3 real tracks: 48 variables > 24.
    let out = run(&[
        "solve",
        "--qubo",
        dir.join("q/qubo.json").to_str().unwrap(),
        "--backend",
        "brute",
        "--out-dir",
        dir.join("s").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("anneal"), "stderr: {stderr}");
}

#[test]
fn unpenalized_solve_fails_with_exit_4() {
    // Without penalties the annealer only reaches infeasible over-assigned
    // minima, so track decoding must fail as a solver failure.
    let dir = tmp_dir("exit4");
    synth(&dir, "0.2", "11");
    let build = run(&[
        "build",
        "--input",
        dir.join("scenario.json").to_str().unwrap(),
        "--out-dir",
        dir.join("q").to_str().unwrap(),
    ]);
    assert_success(&build);
    let out = run(&[
        "solve",
        "--qubo",
        dir.join("q/qubo.json").to_str().unwrap(),
        "--backend",
        "anneal",
        "--reads",
        "64",
        "--sweeps",
        "60",
        "--seed",
        "2",
        "--out-dir",
        dir.join("s").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    // The sample artifacts are still written before the failure surfaces.
    assert!(dir.join("s/samples.csv").exists());
    assert!(dir.join("s/histogram.csv").exists());
    assert!(!dir.join("s/tracks.csv").exists());
}

#[test]
fn unknown_format_version_is_rejected_with_exit_3() {
    let dir = tmp_dir("version");
    synth(&dir, "0.2", "6");
    let path = dir.join("scenario.json");
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replace("\"format_version\": 1", "\"format_version\": 99");
    std::fs::write(&path, text).unwrap();
    let out = run(&[
        "build",
        "--input",
        path.to_str().unwrap(),
        "--out-dir",
        dir.join("q").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_input_fails_with_exit_3() {
    let dir = tmp_dir("missing");
    let out = run(&[
        "build",
        "--input",
        dir.join("nope.json").to_str().unwrap(),
        "--out-dir",
        dir.join("q").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_documents_exit_codes() {
    let out = run(&["--help"]);
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("EXIT CODES"));
    assert!(stdout.contains("solver failure"));
}
