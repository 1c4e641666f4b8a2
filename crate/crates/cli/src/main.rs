use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use malab::config::{BarrierMode, Command, RunConfig, SampledFunction};
use malab::obstacle::{ScenarioKind, ScenarioSpec, SolverMode};
use malab::ot::ShapeName;
use malab::report::RunReport;
use malab::run::{exit_code, render, run};
use malab::{Error, Result};

/// Monge–Ampère measures, obstacle problems and semi-discrete transport.
#[derive(Parser)]
#[command(name = "malab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a TOML configuration file.
    Run { config: PathBuf },
    /// Solve an obstacle scenario and extract its singular density.
    Solve(SolveArgs),
    /// Transport ladder, singular graph and interpolation frames.
    Ot(OtArgs),
    /// Displacement frames from a single transport solve.
    Interp(OtArgs),
    /// Barrier inequality chains, constant search and growth fits.
    Barrier(BarrierArgs),
    /// Monge–Ampère mass of a sampled closed-form function.
    Measure(MeasureArgs),
    /// Draw SVG figures for the CSV artifacts in a directory.
    Render { dir: PathBuf },
}

#[derive(Args)]
struct Common {
    /// Base configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip SVG figures.
    #[arg(long)]
    no_figures: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Segment,
    Polytope,
    Cross,
    Circle,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    h_min: Option<f64>,
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Newton,
    GaussSeidel,
    Jacobi,
}

#[derive(Args)]
struct OtArgs {
    #[command(flatten)]
    common: Common,
    /// split-ball, framed-diamond, square-frame, pacman or cats-eye.
    #[arg(long)]
    example: Option<String>,
    #[arg(long)]
    sites: Option<usize>,
    /// Comma-separated times in [0, 1].
    #[arg(long, value_delimiter = ',')]
    frames: Option<Vec<f64>>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    per_cell: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct BarrierArgs {
    #[command(flatten)]
    common: Common,
    /// Check the inequality chain (the default).
    #[arg(long, group = "barrier_mode")]
    admissibility: bool,
    /// Search the smallest constant of the interaction barrier.
    #[arg(long, group = "barrier_mode")]
    c_star: bool,
    /// Fit the growth of W_n − r²/2.
    #[arg(long, group = "barrier_mode")]
    growth: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Function {
    W2,
    Caffarelli,
    Paraboloid,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    function: Option<Function>,
    #[arg(long)]
    mesh: Option<f64>,
    #[arg(long)]
    domain_radius: Option<f64>,
    /// Measure the disk of this radius.
    #[arg(long)]
    region_radius: Option<f64>,
    /// Measure the square of this half width instead of a disk.
    #[arg(long, conflicts_with = "region_radius")]
    half_width: Option<f64>,
    #[arg(long)]
    refine: bool,
    #[arg(long)]
    tol: Option<f64>,
}

fn base(command: Command, common: &Common) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::new(command),
    };
    if config.command != command {
        return Err(Error::Config(format!(
            "configuration is for '{}', not '{}'",
            config.command.as_str(),
            command.as_str()
        )));
    }
    if let Some(out) = &common.out {
        config.output = out.clone();
    }
    if common.no_figures {
        config.figures = false;
    }
    Ok(config)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn solve_config(a: SolveArgs) -> Result<RunConfig> {
    let mut c = base(Command::Solve, &a.common)?;
    let current = c.scenario_spec();
    let kind = match a.scenario {
        Some(Scenario::Segment) => ScenarioKind::Segment,
        Some(Scenario::Polytope) => ScenarioKind::PolytopeSkeleton,
        Some(Scenario::Cross) => ScenarioKind::Cross,
        Some(Scenario::Circle) => ScenarioKind::SmoothBoundary,
        None => current.kind,
    };
    let n = a.n.unwrap_or(current.n);
    if !(2..=3).contains(&n) {
        return Err(Error::Config(format!("scenarios are solved for n = 2, 3; got {n}")));
    }
    let mut spec = if kind != current.kind || n != current.n {
        ScenarioSpec::preset(kind, n)
    } else {
        current
    };
    set(&mut spec.k, a.k);
    set(&mut spec.eps, a.eps);
    set(&mut spec.alpha, a.alpha);
    set(&mut spec.h_min, a.h_min);
    set(&mut spec.h0, a.h0);
    c.scenario = Some(spec);
    if let Some(m) = a.mode {
        c.solver.mode = match m {
            Mode::Newton => SolverMode::Newton,
            Mode::GaussSeidel => SolverMode::GaussSeidel,
            Mode::Jacobi => SolverMode::Jacobi,
        };
    }
    set(&mut c.solver.tol, a.tol);
    set(&mut c.solver.max_iter, a.max_iter);
    Ok(c)
}

fn ot_config(command: Command, a: OtArgs) -> Result<RunConfig> {
    let mut c = base(command, &a.common)?;
    if let Some(name) = a.example {
        c.ot.example = ShapeName::parse(&name)?;
    }
    set(&mut c.ot.sites, a.sites);
    set(&mut c.ot.frames, a.frames);
    set(&mut c.ot.tau, a.tau);
    set(&mut c.ot.per_cell, a.per_cell);
    set(&mut c.ot.tol, a.tol);
    Ok(c)
}

fn barrier_config(a: BarrierArgs) -> Result<RunConfig> {
    let mut c = base(Command::Barrier, &a.common)?;
    if a.c_star {
        c.barrier.mode = BarrierMode::CStar;
    } else if a.growth {
        c.barrier.mode = BarrierMode::Growth;
    } else if a.admissibility {
        c.barrier.mode = BarrierMode::Admissibility;
    }
    let b = &mut c.barrier;
    set(&mut b.n, a.n);
    set(&mut b.k, a.k);
    set(&mut b.eps, a.eps);
    set(&mut b.rho, a.rho);
    set(&mut b.alpha, a.alpha);
    set(&mut b.grid_points, a.grid_points);
    set(&mut b.radii, a.radii);
    Ok(c)
}

fn measure_config(a: MeasureArgs) -> Result<RunConfig> {
    let mut c = base(Command::Measure, &a.common)?;
    let m = &mut c.measure;
    if let Some(f) = a.function {
        m.function = match f {
            Function::W2 => SampledFunction::W2,
            Function::Caffarelli => SampledFunction::Caffarelli,
            Function::Paraboloid => SampledFunction::Paraboloid,
        };
    }
    set(&mut m.mesh, a.mesh);
    set(&mut m.domain_radius, a.domain_radius);
    set(&mut m.region_radius, a.region_radius);
    if let Some(w) = a.half_width {
        m.half_width = w;
        m.region_radius = 0.0;
    }
    m.refine |= a.refine;
    set(&mut m.tol, a.tol);
    Ok(c)
}

fn summarize(report: &RunReport) {
    for c in &report.payload.checks {
        println!(
            "{} {} value={:e} threshold={:e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    println!(
        "{} {} ({} checks, {:.1} s)",
        report.payload.command,
        if report.passed() { "passed" } else { "failed" },
        report.payload.checks.len(),
        report.elapsed_seconds
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.command {
        Cmd::Render { dir } => {
            return match render(&dir) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            };
        }
        Cmd::Run { config } => RunConfig::load(&config),
        Cmd::Solve(a) => solve_config(a),
        Cmd::Ot(a) => ot_config(Command::Ot, a),
        Cmd::Interp(a) => ot_config(Command::Interp, a),
        Cmd::Barrier(a) => barrier_config(a),
        Cmd::Measure(a) => measure_config(a),
    };
    let outcome = config.and_then(|c| run(&c));
    match &outcome {
        Ok(report) => summarize(report),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&outcome) as u8)
}
