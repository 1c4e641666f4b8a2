use std::fs;

use malab::config::{BarrierMode, Command, RunConfig};
use malab::run::{exit_code, render, run};

fn config(command: Command, dir: &std::path::Path) -> RunConfig {
    let mut c = RunConfig::new(command);
    c.output = dir.to_path_buf();
    c
}

#[test]
fn exit_codes_follow_the_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Command::Barrier, dir.path());
    assert_eq!(exit_code(&run(&c)), 0);
    c.barrier.rho = 0.9;
    assert_eq!(exit_code(&run(&c)), 1);
    c.barrier.n = 1;
    assert_eq!(exit_code(&run(&c)), 2);
}

#[test]
fn growth_fit_reports_its_residual() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Command::Barrier, dir.path());
    c.barrier.mode = BarrierMode::Growth;
    let report = run(&c).unwrap();
    assert!(report.check("fit_residual").is_some());
    assert!(report.payload.artifacts.contains(&"report.json".to_string()));
}

#[test]
fn render_reproduces_the_figures_of_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Command::Interp, dir.path());
    c.ot.sites = 100;
    c.ot.example = malab::ot::ShapeName::Pacman;
    run(&c).unwrap();
    let original = fs::read(dir.path().join("frames").join("t_0.5.svg")).unwrap();
    fs::remove_file(dir.path().join("frames").join("t_0.5.svg")).unwrap();
    let written = render(dir.path()).unwrap();
    assert!(written.iter().any(|p| p.ends_with("t_0.5.svg")));
    assert_eq!(fs::read(dir.path().join("frames").join("t_0.5.svg")).unwrap(), original);
}

#[test]
fn report_json_matches_the_returned_payload() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Command::Measure, dir.path());
    c.measure.function = malab::config::SampledFunction::Paraboloid;
    c.measure.mesh = 0.1;
    let report = run(&c).unwrap();
    let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert_eq!(text, report.to_json() + "\n");
    let echo = fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert_eq!(RunConfig::from_toml(&echo).unwrap(), c);
}
