use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn malab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_malab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn report_text(dir: &Path) -> String {
    fs::read_to_string(dir.join("report.json")).unwrap()
}

#[test]
fn admissibility_passes_with_reference_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = malab(&["barrier", "--admissibility", "--out", &out_arg(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS")));
    assert!(!stdout.contains("FAIL"));
    assert!(dir.path().join("admissibility.txt").exists());
    assert!(report_text(dir.path()).contains("\"passed\": true"));
}

#[test]
fn violated_chain_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = malab(&["barrier", "--rho", "0.9", "--out", &out_arg(dir.path())]);
    assert_eq!(code(&o), 1);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let failing: Vec<&str> = stdout.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failing.len(), 1, "{stdout}");
    assert!(failing[0].contains("rho^2/2 <= rho/4"));
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "command = \"barrier\"\nbogus = 1\n").unwrap();
    let o = malab(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn bad_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(code(&malab(&["ot", "--example", "teapot", "--out", &out])), 2);
    assert_eq!(code(&malab(&["ot", "--example", "framed-diamond", "--sites", "100", "--out", &out])), 2);
    assert_eq!(code(&malab(&["measure", "--mesh", "-1", "--out", &out])), 2);
    assert_eq!(code(&malab(&["run", dir.path().join("missing.toml").to_str().unwrap()])), 2);
}

#[test]
fn render_of_missing_directory_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = malab(&["render", dir.path().join("nothing").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn transport_run_writes_frames_and_graph() {
    let dir = tempfile::tempdir().unwrap();
    let o = malab(&[
        "ot",
        "--example",
        "framed-diamond",
        "--sites",
        "400",
        "--frames",
        "0,0.25,0.5,0.75,1",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(matches!(code(&o), 0 | 1), "{}", String::from_utf8_lossy(&o.stderr));
    let frames = dir.path().join("frames");
    let csv = fs::read_dir(&frames)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    let svg = fs::read_dir(&frames)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
        .count();
    assert_eq!((csv, svg), (5, 5));
    for name in ["singular.csv", "singular.svg", "cells.svg", "report.json", "config.toml"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let report = report_text(dir.path());
    assert!(report.contains("\"tiling\""));

    for f in fs::read_dir(&frames).unwrap() {
        let p = f.unwrap().path();
        if p.extension().is_some_and(|x| x == "svg") {
            fs::remove_file(p).unwrap();
        }
    }
    let o = malab(&["render", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_dir(&frames).unwrap().count(), 10);
}

#[test]
fn config_echo_replays_to_the_same_report() {
    let first = tempfile::tempdir().unwrap();
    let o = malab(&["measure", "--function", "paraboloid", "--mesh", "0.1", "--out", &out_arg(first.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let echo = fs::read_to_string(first.path().join("config.toml")).unwrap();

    let second = tempfile::tempdir().unwrap();
    let replay = echo.replace(&out_arg(first.path()), &out_arg(second.path()));
    let path = second.path().join("replay.toml");
    fs::write(&path, &replay).unwrap();
    let o = malab(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);

    let a = fs::read_to_string(first.path().join("measure.csv")).unwrap();
    let b = fs::read_to_string(second.path().join("measure.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        fs::read_to_string(second.path().join("config.toml")).unwrap(),
        replay
    );
    let config = malab::config::RunConfig::from_toml(&echo).unwrap();
    assert_eq!(config.measure.mesh, 0.1);
}

#[test]
fn flags_override_a_base_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.toml");
    fs::write(&base, "command = \"barrier\"\n[barrier]\nrho = 0.9\n").unwrap();
    let out = out_arg(&dir.path().join("run"));
    assert_eq!(code(&malab(&["barrier", "--config", base.to_str().unwrap(), "--out", &out])), 1);
    let o = malab(&["barrier", "--config", base.to_str().unwrap(), "--rho", "0.5", "--out", &out]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&malab(&["measure", "--config", base.to_str().unwrap(), "--out", &out])), 2);
}

#[test]
fn solve_writes_profile_and_solution() {
    let dir = tempfile::tempdir().unwrap();
    let o = malab(&[
        "solve", "--scenario", "cross", "--h0", "0.1", "--h-min", "0.05", "--out", &out_arg(dir.path()),
    ]);
    assert!(matches!(code(&o), 0 | 1), "{}", String::from_utf8_lossy(&o.stderr));
    let solution = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let (dim, rows) = malab::io::read_solution_csv(&solution).unwrap();
    assert_eq!(dim, 2);
    assert!(!rows.is_empty());
    let profile = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(!malab::io::read_profile_csv(&profile).unwrap().is_empty());
    assert!(dir.path().join("profile.svg").exists());
}
