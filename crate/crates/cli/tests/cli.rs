//! End-to-end subprocess tests of the `rdh2` binary: exit codes, output
//! files, determinism, and input validation.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cli_bin() -> &'static str {
    env!("CARGO_BIN_EXE_rdh2")
}

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn fresh_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rdh2-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(cli_bin()).args(args).output().expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stderr_text(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

/// Gain known to stabilize the whole ±5% uncertainty box of the benchmark.
fn stabilizing_gain_json() -> String {
    r#"{"rows": 2, "cols": 3, "data": [0.2913, 1.9626, 0.0, 0.0, 0.0, 3.0040]}"#.to_string()
}

#[test]
fn solve_verify_round_trip_on_the_two_vertex_problem() {
    let dir = fresh_dir("roundtrip");
    let problem = data_file("example1_m2.json");
    let out_dir = dir.to_str().unwrap();

    let solve = run(&["solve", problem.to_str().unwrap(), "--out-dir", out_dir]);
    assert_eq!(exit_code(&solve), 0, "stderr: {}", stderr_text(&solve));

    let result_text = std::fs::read_to_string(dir.join("result.json")).unwrap();
    let result: serde_json::Value = serde_json::from_str(&result_text).unwrap();
    assert_eq!(result["status"], "converged");
    let bound = result["bound"].as_f64().unwrap();
    assert!((13.0..13.45).contains(&bound), "bound {bound}");
    let k = result["k"]["data"].as_array().unwrap();
    assert_eq!(k.len(), 6);
    // Masked entries are serialized as exact zeros.
    assert_eq!(k[2].as_f64().unwrap(), 0.0);
    assert_eq!(k[3].as_f64().unwrap(), 0.0);
    assert_eq!(k[4].as_f64().unwrap(), 0.0);

    let csv = std::fs::read_to_string(dir.join("convergence.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let cols: Vec<&str> = last.split(',').collect();
    let final_err: f64 = cols[5].parse().unwrap();
    assert!(final_err < 1e-3, "final err {final_err}");
    let final_iter: usize = cols[0].parse().unwrap();
    assert_eq!(final_iter as u64, result["iterations"].as_u64().unwrap());

    let verify = run(&[
        "verify",
        problem.to_str().unwrap(),
        "--result",
        dir.join("result.json").to_str().unwrap(),
        "--out-dir",
        out_dir,
    ]);
    assert_eq!(exit_code(&verify), 0, "stderr: {}", stderr_text(&verify));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("verify_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["structure_ok"], true);
    assert_eq!(report["all_stable"], true);
    assert_eq!(report["bound_ok"], true);
    assert_eq!(report["vertices"].as_array().unwrap().len(), 2);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn resolving_twice_is_bit_for_bit_deterministic() {
    let problem = data_file("example1_m2.json");
    let dir_a = fresh_dir("determinism-a");
    let dir_b = fresh_dir("determinism-b");
    for dir in [&dir_a, &dir_b] {
        let out = run(&["solve", problem.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 0);
    }
    let a = std::fs::read_to_string(dir_a.join("result.json")).unwrap();
    let b = std::fs::read_to_string(dir_b.join("result.json")).unwrap();
    // wall_time_s legitimately differs between runs; everything else must
    // match byte for byte.
    let strip = |text: &str| {
        text.lines().filter(|l| !l.contains("wall_time_s")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
    let ca = std::fs::read_to_string(dir_a.join("convergence.csv")).unwrap();
    let cb = std::fs::read_to_string(dir_b.join("convergence.csv")).unwrap();
    assert_eq!(ca, cb);
    std::fs::remove_dir_all(&dir_a).ok();
    std::fs::remove_dir_all(&dir_b).ok();
}

#[test]
fn malformed_and_invalid_files_exit_1() {
    let dir = fresh_dir("badfiles");

    let garbled = dir.join("garbled.json");
    std::fs::write(&garbled, "{ \"a\": [1, 2,\n  broken").unwrap();
    let out = run(&["solve", garbled.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_text(&out).contains("line"), "stderr: {}", stderr_text(&out));

    let valid = std::fs::read_to_string(data_file("example1_m2.json")).unwrap();
    let unknown = dir.join("unknown.json");
    std::fs::write(&unknown, valid.replace("\"name\"", "\"mystery_key\"")).unwrap();
    let out = run(&["solve", unknown.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_text(&out).contains("mystery_key"));

    let bad_blocks = dir.join("bad_blocks.json");
    std::fs::write(&bad_blocks, valid.replace("[2, 1]", "[2, 2]")).unwrap();
    let out = run(&["solve", bad_blocks.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_text(&out).contains("sum to 4"));

    let out = run(&["solve", "/nonexistent/nope.json"]);
    assert_eq!(exit_code(&out), 1);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn iteration_cap_exits_2_with_an_honest_status() {
    let dir = fresh_dir("cap");
    let out = run(&[
        "solve",
        data_file("example1_m2.json").to_str().unwrap(),
        "--max-iter",
        "1",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["status"], "max_iterations");
    assert_eq!(result["iterations"], 1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn solver_defaults_apply_when_the_file_omits_them() {
    // The 512-vertex file has no solver block and the 16-vertex file only
    // pins epsilon; both must parse and run with defaults filling the gaps.
    for name in ["example1.json", "example1_m16.json"] {
        let dir = fresh_dir(&format!("defaults-{name}"));
        let out = run(&[
            "solve",
            data_file(name).to_str().unwrap(),
            "--max-iter",
            "1",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 2, "stderr: {}", stderr_text(&out));
        let stdout = String::from_utf8_lossy(&out.stdout).to_string();
        assert!(stdout.contains("sigma 1"), "stdout: {stdout}");
        assert!(stdout.contains("tau 0.618"));
        std::fs::remove_dir_all(&dir).ok();
    }
}

#[test]
fn verifying_the_zero_gain_exits_4() {
    let dir = fresh_dir("zerogain");
    let gain_path = dir.join("zero.json");
    std::fs::write(&gain_path, r#"{"rows": 2, "cols": 3, "data": [0,0,0,0,0,0]}"#).unwrap();
    let out = run(&[
        "verify",
        data_file("example1_m2.json").to_str().unwrap(),
        "--gain",
        gain_path.to_str().unwrap(),
        "--bound",
        "100.0",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 4);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("verify_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["all_stable"], false);
    assert_eq!(report["bound_ok"], false);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_flag_combinations_are_validated() {
    let problem = data_file("example1_m2.json");
    let problem = problem.to_str().unwrap();

    // Neither gain source.
    let out = run(&["verify", problem]);
    assert_eq!(exit_code(&out), 1);

    // --gain without --bound (clap `requires`).
    let out = run(&["verify", problem, "--gain", "whatever.json"]);
    assert_eq!(exit_code(&out), 1);

    // Both sources at once (clap `conflicts_with`).
    let out = run(&["verify", problem, "--result", "r.json", "--gain", "g.json", "--bound", "1"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn simulate_writes_the_sampling_contract() {
    let dir = fresh_dir("simulate");
    let gain_path = dir.join("gain.json");
    std::fs::write(&gain_path, stabilizing_gain_json()).unwrap();

    let out = run(&[
        "simulate",
        data_file("example1_m2.json").to_str().unwrap(),
        "--gain",
        gain_path.to_str().unwrap(),
        "--vertex",
        "lower",
        "--horizon",
        "20",
        "--dt",
        "0.01",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));

    let csv = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    // Header plus horizon/dt + 1 samples.
    assert_eq!(lines.len(), 1 + 2001);
    assert_eq!(lines[0].split(',').count(), 1 + 3 * 3);
    assert!(lines[0].starts_with("time,w0_x0"));
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    // Channel 0 starts at x(0) = first column of B1 = e0.
    assert_eq!(first[1], 1.0);
    assert_eq!(first[2], 0.0);

    let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    let final_norm: f64 = last[1..4].iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(final_norm < 1e-2, "stable loop decays: {final_norm}");

    let svg = std::fs::read_to_string(dir.join("trajectory.svg")).unwrap();
    assert!(svg.contains("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 9);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn simulate_validates_vertex_and_step_flags() {
    let dir = fresh_dir("simflags");
    let gain_path = dir.join("gain.json");
    std::fs::write(&gain_path, stabilizing_gain_json()).unwrap();
    let problem = data_file("example1_m2.json");
    let problem = problem.to_str().unwrap();
    let gain = gain_path.to_str().unwrap();

    let out = run(&["simulate", problem, "--gain", gain, "--vertex", "99"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_text(&out).contains("out of range"));

    let out = run(&["simulate", problem, "--gain", gain, "--vertex", "sideways"]);
    assert_eq!(exit_code(&out), 1);

    let out = run(&["simulate", problem, "--gain", gain, "--dt", "0"]);
    assert_eq!(exit_code(&out), 1);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn nominal_vertex_simulation_runs_on_the_full_benchmark() {
    let dir = fresh_dir("nominal");
    let gain_path = dir.join("gain.json");
    std::fs::write(&gain_path, stabilizing_gain_json()).unwrap();
    let out = run(&[
        "simulate",
        data_file("example1.json").to_str().unwrap(),
        "--gain",
        gain_path.to_str().unwrap(),
        "--horizon",
        "5",
        "--dt",
        "0.01",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("vertex: nominal"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_result_gain_is_reported() {
    let dir = fresh_dir("nogain");
    // A result whose gain recovery failed carries "k": null.
    let result_path = dir.join("result.json");
    std::fs::write(
        &result_path,
        r#"{"k": null, "w": {"rows": 1, "cols": 1, "data": [1.0]}, "bound": 1.0, "status": "converged", "iterations": 1, "wall_time_s": 0.1}"#,
    )
    .unwrap();
    let out = run(&[
        "verify",
        data_file("example1_m2.json").to_str().unwrap(),
        "--result",
        result_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_text(&out).contains("no recovered gain"));
    std::fs::remove_dir_all(&dir).ok();
}
