//! The batch pipeline: one configuration in, artifacts and a report out.

use std::f64::consts::PI;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use crate::barriers::{
    admissibility_check_chain, eval_barrier, eval_w, find_c_star, grid4, growth_check, BarrierSpec, Chain,
};
use crate::check::Check;
use crate::config::{BarrierMode, Command, RunConfig, SampledFunction};
use crate::convex::{disk_lattice, ma_atoms, measure_from_atoms, sample, Point, Region};
use crate::io::{self, FrameRow, ProfileRow, SegmentRow, SolutionRow};
use crate::obstacle::{build_problem, solve, verify, ScenarioKind};
use crate::ot::{displacement_frames, solve_dual, solve_ladder, verify_ladder, DualSolution, SingularGraph, TILING_TOL};
use crate::report::{Payload, RunReport, Versions};
use crate::svg::{self, View};
use crate::{Error, Result};

/// Process exit status for the outcome of a run: `0` when every check
/// passes, `1` on a failed check or a failed computation, `2` on a
/// configuration or input error.
pub fn exit_code(outcome: &Result<RunReport>) -> i32 {
    match outcome {
        Ok(r) if r.passed() => 0,
        Ok(_) => 1,
        Err(e) if e.is_config() => 2,
        Err(_) => 1,
    }
}

/// Artifacts written so far, relative to the output directory.
struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Result<Output> {
        fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<fs::File>> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        self.files.push(name.to_string());
        Ok(BufWriter::new(fs::File::create(path)?))
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, body)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

struct Outcome {
    checks: Vec<Check>,
    details: serde_json::Value,
}

/// Executes the configured command, writes its artifacts and `report.json`
/// into the output directory and returns the report.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let mut out = Output::new(&config.output)?;
    out.text("config.toml", &config.to_toml())?;
    let outcome = match config.command {
        Command::Solve => run_solve(config, &mut out)?,
        Command::Ot => run_ot(config, &mut out)?,
        Command::Interp => run_interp(config, &mut out)?,
        Command::Barrier => run_barrier(config, &mut out)?,
        Command::Measure => run_measure(config, &mut out)?,
    };
    out.files.push("report.json".into());
    let report = RunReport {
        payload: Payload {
            command: config.command.as_str().into(),
            config: config.clone(),
            versions: Versions::default(),
            passed: outcome.checks.iter().all(|c| c.pass),
            checks: outcome.checks,
            details: outcome.details,
            artifacts: out.files.clone(),
        },
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    report.write(&config.output.join("report.json"))?;
    Ok(report)
}

fn run_solve(config: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let spec = config.scenario_spec();
    let problem = build_problem(&spec)?;
    let solution = solve(&problem, &config.solver)?;
    let report = verify(&problem, &solution)?;
    let dim = problem.cloud.dim();
    let rows: Vec<SolutionRow> = (0..problem.cloud.len())
        .map(|i| SolutionRow {
            x: problem.cloud.node(i),
            u: solution.values[i],
            atom: solution.atoms.atoms[i],
            mu: problem.mu[i],
            tag: problem.cloud.tags()[i],
            contact: solution.contact[i],
        })
        .collect();
    io::write_solution_csv(dim, &rows, out.create("solution.csv")?)?;
    let profile: Vec<ProfileRow> = report
        .density
        .samples
        .iter()
        .map(|s| ProfileRow {
            s: s.s.clone(),
            excess: s.excess,
            cell: s.cell,
            f: s.f,
        })
        .collect();
    io::write_profile_csv(&profile, out.create("profile.csv")?)?;
    if config.figures {
        let reference = density_reference(spec.kind, spec.directions.len());
        out.text("profile.svg", &svg::profile_svg(&profile, reference, spec.kind.as_str()))?;
    }
    let worst_section = report.sections.iter().map(|s| s.ratio).fold(0.0, f64::max);
    let details = json!({
        "scenario": spec.kind.as_str(),
        "nodes": report.nodes,
        "iterations": report.iterations,
        "residual": report.residual,
        "f_min": report.density.f_min,
        "f_max": report.density.f_max,
        "singular_mass": report.density.singular_mass,
        "junctions": report.density.junctions,
        "worst_section_ratio": worst_section,
        "thinness": report.thinness,
        "admissibility": report.admissibility,
        "history": solution.history,
    });
    Ok(Outcome {
        checks: report.checks,
        details,
    })
}

/// Continuum lower bound on the singular density, when one is known.
fn density_reference(kind: ScenarioKind, directions: usize) -> Option<f64> {
    match kind {
        ScenarioKind::Segment => Some(Chain::Line.implied_bound()),
        ScenarioKind::PolytopeSkeleton => Some(Chain::Polytope.implied_bound()),
        ScenarioKind::Cross => Some(0.25 / directions.max(1) as f64),
        ScenarioKind::SmoothBoundary => None,
    }
}

fn segment_rows(graph: &SingularGraph) -> Vec<SegmentRow> {
    graph
        .edges
        .iter()
        .map(|e| SegmentRow { a: e.a, b: e.b, f: e.f })
        .collect()
}

fn time_name(t: f64) -> String {
    format!("frames/t_{}", io::fmt12(t))
}

fn frame_title(t: f64) -> String {
    format!("t = {}", io::fmt12(t))
}

fn write_frames(config: &RunConfig, dual: &DualSolution, singular: &[SegmentRow], out: &mut Output) -> Result<usize> {
    let frames = displacement_frames(dual, &config.ot.frames, config.ot.per_cell)?;
    let view = View::fit(frames.frames.iter().flatten().map(|r| r.x));
    for (t, rows) in frames.times.iter().zip(&frames.frames) {
        let name = time_name(*t);
        io::write_frame_csv(rows, out.create(&format!("{name}.csv"))?)?;
        if config.figures {
            out.text(&format!("{name}.svg"), &svg::frame_svg(rows, view, &frame_title(*t)))?;
        }
    }
    if config.figures {
        let diagram = dual.diagram()?;
        out.text(
            "cells.svg",
            &svg::cells_svg(&diagram.cells, singular, View::fit(dual.source.iter().copied()), "power cells"),
        )?;
    }
    Ok(frames.samples.len())
}

fn run_ot(config: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let shape = config.ot.shape();
    let ladder = solve_ladder(&shape, config.ot.sites, &config.ot.dual(), config.ot.tau)?;
    let report = verify_ladder(&shape, &ladder, config.ot.tol)?;
    let rows = segment_rows(&ladder.graph);
    io::write_singular_csv(&rows, out.create("singular.csv")?)?;
    if config.figures {
        let view = View::fit(ladder.coarse.source.iter().copied());
        out.text("singular.svg", &svg::singular_svg(&rows, view, "singular graph"))?;
    }
    let samples = write_frames(config, &ladder.coarse, &rows, out)?;
    let details = json!({
        "report": report,
        "frame_samples": samples,
        "coarse_history": ladder.coarse.history,
        "fine_history": ladder.fine.history,
    });
    Ok(Outcome {
        checks: report.checks,
        details,
    })
}

fn run_interp(config: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let shape = config.ot.shape();
    let dual = solve_dual(&shape.source_polygon(), &shape.sample(config.ot.sites)?, &config.ot.dual())?;
    let tiling = dual.diagram()?.tiling_defect();
    let samples = write_frames(config, &dual, &[], out)?;
    let checks = vec![
        Check::at_most("dual_residual", dual.residual, config.ot.tol),
        Check::at_most("tiling", tiling, TILING_TOL),
    ];
    let details = json!({
        "example": shape.name.as_str(),
        "sites": dual.len(),
        "frame_samples": samples,
        "history": dual.history,
    });
    Ok(Outcome { checks, details })
}

fn run_barrier(config: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let b = &config.barrier;
    match b.mode {
        BarrierMode::Admissibility => {
            let report = admissibility_check_chain(&b.chain, b.n, b.k, b.eps, b.rho, b.alpha)?;
            out.text("admissibility.txt", &report.to_text())?;
            let checks = report
                .records
                .iter()
                .map(|r| Check {
                    name: r.name.clone(),
                    value: r.lhs,
                    threshold: r.rhs,
                    pass: r.pass,
                })
                .collect();
            Ok(Outcome {
                checks,
                details: json!({ "admissibility": report }),
            })
        }
        BarrierMode::CStar => {
            let samples = grid4(b.grid_lo, b.grid_hi, b.grid_points);
            match find_c_star(&samples) {
                Ok(search) => {
                    let checks = vec![
                        Check {
                            name: "min_det_at_c_star".into(),
                            value: search.at_c_star.min_det,
                            threshold: 1.0,
                            pass: search.at_c_star.min_det >= 1.0,
                        },
                        Check::at_most("min_det_below_one_at_quarter", search.at_quarter.min_det, 1.0),
                    ];
                    Ok(Outcome {
                        checks,
                        details: json!({ "search": search }),
                    })
                }
                Err(Error::NonConvergence { iterations, residual, history }) => Ok(Outcome {
                    checks: vec![Check::flag("c_star_bracketed", false)],
                    details: json!({
                        "doublings": iterations,
                        "last_min_det": residual,
                        "min_det_history": history,
                    }),
                }),
                Err(e) => Err(e),
            }
        }
        BarrierMode::Growth => {
            let fit = growth_check(b.n as u32, &b.radii)?;
            Ok(Outcome {
                checks: vec![Check::at_most("fit_residual", fit.max_residual, 1e-3)],
                details: json!({ "fit": fit }),
            })
        }
    }
}

/// Measured mass and the closed-form value of one sampling.
struct Measurement {
    mesh: f64,
    nodes: usize,
    mass: f64,
    expected: Option<f64>,
    line_density: Option<f64>,
}

fn evaluate(function: SampledFunction, p: &Point) -> f64 {
    match function {
        SampledFunction::W2 => eval_w(2, &p[..2]).0,
        SampledFunction::Caffarelli => eval_barrier(&BarrierSpec::Caffarelli, &p[..2]).expect("two coordinates"),
        SampledFunction::Paraboloid => 0.5 * (p[0] * p[0] + p[1] * p[1]),
    }
}

fn measure_once(config: &RunConfig, mesh: f64) -> Result<Measurement> {
    let m = &config.measure;
    let cloud = disk_lattice(m.domain_radius, mesh)?;
    let f = sample(&cloud, |p| evaluate(m.function, p))?;
    let table = ma_atoms(&f)?;
    let disk = m.region_radius > 0.0;
    let region = if disk {
        Region::Ball {
            center: [0.0; 3],
            radius: m.region_radius,
        }
    } else {
        Region::Rect {
            lo: [-m.half_width, -m.half_width, f64::NEG_INFINITY],
            hi: [m.half_width, m.half_width, f64::INFINITY],
        }
    };
    let mass = measure_from_atoms(&f, &table, &region);
    let (area, length) = if disk {
        let r = m.region_radius;
        (PI * r * r, 2.0 * r)
    } else {
        let a = m.half_width;
        (4.0 * a * a, 2.0 * a)
    };
    let expected = match m.function {
        SampledFunction::W2 if disk => Some(PI * (1.0 + m.region_radius * m.region_radius)),
        SampledFunction::W2 => None,
        SampledFunction::Caffarelli => Some(area + 2.0 * length),
        SampledFunction::Paraboloid => Some(area),
    };
    let line_density = (m.function == SampledFunction::Caffarelli).then(|| {
        let mut total = 0.0;
        let mut count = 0usize;
        for (i, p) in cloud.nodes().iter().enumerate() {
            if p[0].abs() < 0.5 * mesh && region.contains(i, p) {
                total += table.atoms[i] - mesh * mesh;
                count += 1;
            }
        }
        total / (count as f64 * mesh)
    });
    Ok(Measurement {
        mesh,
        nodes: cloud.len(),
        mass,
        expected,
        line_density,
    })
}

fn run_measure(config: &RunConfig, out: &mut Output) -> Result<Outcome> {
    let m = &config.measure;
    let mut levels = vec![measure_once(config, m.mesh)?];
    if m.refine {
        levels.push(measure_once(config, 0.5 * m.mesh)?);
    }
    let error = |l: &Measurement| l.expected.map(|e| (l.mass - e).abs() / e);
    let mut checks = Vec::new();
    if let Some(err) = error(&levels[0]) {
        checks.push(Check::at_most("relative_mass_error", err, m.tol));
    }
    if let Some(f) = levels[0].line_density {
        checks.push(Check::at_most("line_density_error", (f - 2.0).abs() / 2.0, m.line_tol));
    }
    if let (Some(coarse), Some(fine)) = (error(&levels[0]), levels.get(1).and_then(error)) {
        checks.push(Check::at_most("refined_error_ratio", fine / coarse, 0.5));
    }
    let mut table = String::from("mesh,nodes,mass,expected,line_density\n");
    for l in &levels {
        table += &format!(
            "{},{},{},{},{}\n",
            io::fmt12(l.mesh),
            l.nodes,
            io::fmt12(l.mass),
            l.expected.map_or(String::new(), io::fmt12),
            l.line_density.map_or(String::new(), io::fmt12)
        );
    }
    out.text("measure.csv", &table)?;
    let details = json!({
        "function": m.function,
        "levels": levels.iter().map(|l| json!({
            "mesh": l.mesh,
            "nodes": l.nodes,
            "mass": l.mass,
            "expected": l.expected,
            "relative_error": error(l),
            "line_density": l.line_density,
        })).collect::<Vec<_>>(),
    });
    Ok(Outcome { checks, details })
}

/// Draws every artifact found in `dir`: `profile.csv`, `singular.csv` and
/// `frames/t_*.csv`. Returns the SVG files written.
pub fn render(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::Config(format!("{} is not a directory", dir.display())));
    }
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())));
    // The echoed configuration restores the reference line and the source
    // frame; without it the figures are fit to the data alone.
    let echo = dir.join("config.toml");
    let config = if echo.is_file() { Some(RunConfig::load(&echo)?) } else { None };
    let mut written = Vec::new();
    let profile = dir.join("profile.csv");
    if profile.is_file() {
        let rows = io::read_profile_csv(&read(&profile)?)?;
        let path = dir.join("profile.svg");
        let figure = match &config {
            Some(c) => {
                let spec = c.scenario_spec();
                svg::profile_svg(&rows, density_reference(spec.kind, spec.directions.len()), spec.kind.as_str())
            }
            None => svg::profile_svg(&rows, None, "density profile"),
        };
        fs::write(&path, figure)?;
        written.push(path);
    }
    let singular = dir.join("singular.csv");
    if singular.is_file() {
        let rows = io::read_singular_csv(&read(&singular)?)?;
        let view = match &config {
            Some(c) => View::fit(c.ot.shape().source_polygon()),
            None => View::fit(rows.iter().flat_map(|r| [r.a, r.b])),
        };
        let path = dir.join("singular.svg");
        fs::write(&path, svg::singular_svg(&rows, view, "singular graph"))?;
        written.push(path);
    }
    let frames = dir.join("frames");
    if frames.is_dir() {
        let mut names: Vec<PathBuf> = fs::read_dir(&frames)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        names.sort();
        let mut all: Vec<Vec<FrameRow>> = Vec::new();
        for p in &names {
            all.push(io::read_frame_csv(&read(p)?)?);
        }
        let view = View::fit(all.iter().flatten().map(|r| r.x));
        for (p, rows) in names.iter().zip(&all) {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("frame");
            let title = match stem.strip_prefix("t_").and_then(|t| t.parse::<f64>().ok()) {
                Some(t) => frame_title(t),
                None => stem.to_string(),
            };
            let path = p.with_extension("svg");
            fs::write(&path, svg::frame_svg(rows, view, &title))?;
            written.push(path);
        }
    }
    if written.is_empty() {
        return Err(Error::Config(format!("no artifacts to render in {}", dir.display())));
    }
    Ok(written)
}
