//! Acceptance criteria 1–13. Run one subset with
//! `cargo test -p malab-suite --test acceptance -- 8 9`.

use std::fs;

use malab::barriers::{admissibility_check, find_c_star, grid4, hessian_det_check, interaction_det_exact};
use malab::config::{Command, RunConfig, SampledFunction};
use malab::convex::{
    legendre_transform, lower_convex_envelope, ma_measure, subgradient_oracle, NodeTag, PLConvexFunction, PointCloud,
    Region,
};
use malab::obstacle::{
    build_problem, solve, verify, DensityProfile, ScenarioKind, ScenarioSpec, SolveOptions, SolverMode,
    VerificationReport, OFF_SUPPORT_TOL, SANDWICH_TOL, SYMMETRY_TOL,
};
use malab::ot::{solve_dual, solve_ladder, verify_ladder, DualOptions, OtReport, ShapeName, ShapeSpec, TAU};
use malab::run::run;
use malab_suite::{filter_from_args, run_all, Criterion, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<Verdict, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn value(report: &malab::report::RunReport, name: &str) -> Result<f64, String> {
    report.check(name).map(|c| c.value).ok_or_else(|| format!("missing check {name}"))
}

fn measure(function: SampledFunction, mesh: f64, half_width: Option<f64>, refine: bool) -> Result<malab::report::RunReport, String> {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut c = RunConfig::new(Command::Measure);
    c.output = dir.path().to_path_buf();
    c.measure.function = function;
    c.measure.mesh = mesh;
    c.measure.refine = refine;
    if let Some(w) = half_width {
        c.measure.half_width = w;
        c.measure.region_radius = 0.0;
    }
    run(&c).map_err(err)
}

fn barrier_calibration() -> Outcome {
    let r = measure(SampledFunction::W2, 0.02, None, true)?;
    let e = value(&r, "relative_mass_error")?;
    let ratio = value(&r, "refined_error_ratio")?;
    Ok(Verdict::new(
        e <= 0.05 && ratio <= 0.5,
        format!("|M(B1)/2pi - 1| = {e:.2e} at mesh 0.02, error ratio after refinement {ratio:.3}"),
    ))
}

fn caffarelli_measure() -> Outcome {
    let r = measure(SampledFunction::Caffarelli, 0.01, Some(0.5), false)?;
    let e = value(&r, "relative_mass_error")?;
    let f = value(&r, "line_density_error")?;
    Ok(Verdict::new(
        e <= 0.02 && f <= 0.05,
        format!("|M(Q)/3 - 1| = {e:.2e} at mesh 0.01, |f/2 - 1| = {f:.2e}"),
    ))
}

fn admissibility_chain() -> Outcome {
    let good = admissibility_check(2, 1, 0.2, 0.5, 0.5).map_err(err)?;
    let bad = admissibility_check(2, 1, 0.2, 0.9, 0.5).map_err(err)?;
    let failures = bad.failures();
    let pass = good.pass && !bad.pass && failures == ["rho^2/2 <= rho/4"];
    Ok(Verdict::new(
        pass,
        format!("rho = 0.5 passes: {}, rho = 0.9 fails {:?}", good.pass, failures),
    ))
}

struct Solved {
    report: VerificationReport,
    inner: Vec<(f64, f64)>,
}

fn solve_scenario(spec: &ScenarioSpec) -> Result<Solved, String> {
    let problem = build_problem(spec).map_err(err)?;
    let solution = solve(&problem, &SolveOptions::default()).map_err(err)?;
    let report = verify(&problem, &solution).map_err(err)?;
    let inner = inner_profile(&report.density);
    Ok(Solved { report, inner })
}

/// `(s, f)` of the inner samples of the first piece, sorted by `s`.
fn inner_profile(d: &DensityProfile) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = d
        .samples
        .iter()
        .filter(|s| s.inner && s.piece == 0)
        .map(|s| (s.s[0], s.f))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn interpolate(profile: &[(f64, f64)], s: f64) -> Option<f64> {
    let k = profile.partition_point(|p| p.0 < s);
    if k == 0 || k == profile.len() {
        return profile.iter().find(|p| p.0 == s).map(|p| p.1);
    }
    let (a, b) = (profile[k - 1], profile[k]);
    Some(a.1 + (b.1 - a.1) * (s - a.0) / (b.0 - a.0))
}

fn check_value(report: &VerificationReport, name: &str) -> Result<f64, String> {
    report.check(name).map(|c| c.value).ok_or_else(|| format!("missing check {name}"))
}

fn segment_scenario() -> Outcome {
    let mut spec = ScenarioSpec::preset(ScenarioKind::Segment, 2);
    spec.h_min = 0.02;
    let coarse = solve_scenario(&spec)?;
    spec.h_min = 0.01;
    let fine = solve_scenario(&spec)?;
    // Pointwise on the open inner segment: the two end nodes sit on the
    // contact transition and move with the mesh.
    let open = spec.alpha * spec.eps * (1.0 - 1e-9);
    let coarse_open: Vec<(f64, f64)> = coarse.inner.iter().copied().filter(|p| p.0.abs() < open).collect();
    let mut drift: f64 = 0.0;
    for &(s, f) in fine.inner.iter().filter(|p| p.0.abs() < open) {
        if let Some(g) = interpolate(&coarse_open, s) {
            drift = drift.max((f - g).abs() / g.abs());
        }
    }
    let f_min = coarse.report.density.f_min.min(fine.report.density.f_min);
    let off = check_value(&coarse.report, "off_support_residual")?.max(check_value(&fine.report, "off_support_residual")?);
    let sandwich = ["sandwich_lower", "sandwich_upper"]
        .iter()
        .map(|n| Ok(check_value(&coarse.report, n)?.max(check_value(&fine.report, n)?)))
        .collect::<Result<Vec<f64>, String>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let pass = f_min >= 0.4 && off <= OFF_SUPPORT_TOL && sandwich <= SANDWICH_TOL && drift <= 0.25;
    Ok(Verdict::new(
        pass,
        format!("min f = {f_min:.4}, off-support residual {off:.2e}, sandwich {sandwich:.1e}, f drift 0.02->0.01 {drift:.2e}"),
    ))
}

fn polytope_scenario() -> Outcome {
    let mut spec = ScenarioSpec::preset(ScenarioKind::PolytopeSkeleton, 2);
    spec.h_min = 0.02;
    let s = solve_scenario(&spec)?;
    let f_min = s.report.density.f_min;
    let sections = s.report.check("section_scaling").ok_or("missing section check")?;
    let heights: Vec<f64> = {
        let mut h: Vec<f64> = s.report.sections.iter().map(|r| r.h).collect();
        h.sort_by(f64::total_cmp);
        h.dedup();
        h
    };
    Ok(Verdict::new(
        f_min >= 0.08 && sections.pass,
        format!(
            "min f on the edges = {f_min:.4}, worst |S_h|/h = {:.3} <= {:.3} over h in {heights:?}",
            sections.value, sections.threshold
        ),
    ))
}

fn cross_scenario() -> Outcome {
    let mut spec = ScenarioSpec::preset(ScenarioKind::Cross, 2);
    spec.h_min = 0.02;
    let s = solve_scenario(&spec)?;
    let d = &s.report.density;
    let origin = d.junctions.iter().map(|j| j.excess).fold(f64::NEG_INFINITY, f64::max);
    let per_piece: Vec<f64> = (0..2)
        .map(|p| {
            d.samples
                .iter()
                .filter(|x| x.piece == p && x.inner)
                .map(|x| x.f)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let symmetry = check_value(&s.report, "symmetry")?;
    let pass = origin > 0.0 && per_piece.iter().all(|f| *f > 0.0 && f.is_finite()) && symmetry <= SYMMETRY_TOL;
    Ok(Verdict::new(
        pass,
        format!("origin excess {origin:.4e}, min f per segment {per_piece:.4?}, symmetry defect {symmetry:.1e}"),
    ))
}

fn circle_scenario() -> Outcome {
    let spec = ScenarioSpec::preset(ScenarioKind::SmoothBoundary, 2);
    let s = solve_scenario(&spec)?;
    let d = &s.report.density;
    let f_min = d.samples.iter().map(|x| x.f).fold(f64::INFINITY, f64::min);
    let off = check_value(&s.report, "off_support_residual")?;
    Ok(Verdict::new(
        f_min > 0.0 && !d.samples.is_empty() && off <= 0.05,
        format!("{} boundary samples, min f = {f_min:.4}, interior residual {off:.2e}", d.samples.len()),
    ))
}

fn ot_report(name: ShapeName) -> Result<OtReport, String> {
    let spec = ShapeSpec::new(name);
    let ladder = solve_ladder(&spec, 4000, &DualOptions::default(), TAU).map_err(err)?;
    verify_ladder(&spec, &ladder, DualOptions::default().tol).map_err(err)
}

fn named(r: &OtReport, names: &[&str]) -> Result<(bool, String), String> {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in names {
        let c = r.check(n).ok_or_else(|| format!("missing check {n}"))?;
        pass &= c.pass;
        parts.push(format!("{n} {:.3e} (limit {:.3e})", c.value, c.threshold));
    }
    Ok((pass, parts.join(", ")))
}

fn split_ball() -> Outcome {
    let r = ot_report(ShapeName::SplitBall)?;
    let (pass, text) = named(&r, &["map_error", "hausdorff_to_segment", "density_deviation"])?;
    Ok(Verdict::new(pass, text))
}

fn framed_diamond() -> Outcome {
    let r = ot_report(ShapeName::FramedDiamond)?;
    let (pass, text) = named(&r, &["distance_to_axes", "graph_symmetry"])?;
    Ok(Verdict::new(pass && r.graph_edges > 0, format!("{} edges, {text}", r.graph_edges)))
}

fn pacman_cats_eye() -> Outcome {
    let pacman = ot_report(ShapeName::Pacman)?;
    let eye = ot_report(ShapeName::CatsEye)?;
    let (p, pt) = named(&pacman, &["distance_to_axis"])?;
    let (e, et) = named(&eye, &["distance_to_axis", "max_abs_y"])?;
    let nonempty = pacman.graph_edges > 0 && eye.graph_edges > 0;
    Ok(Verdict::new(p && e && nonempty, format!("pacman: {pt}; cat's eye: {et}")))
}

/// Random PL convex instance on at most 50 nodes of the square `[−1, 1]²`.
fn random_instance(rng: &mut ChaCha8Rng) -> Result<PLConvexFunction, String> {
    let interior = rng.gen_range(5..=46);
    let mut nodes = vec![[-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [1.0, 1.0, 0.0], [-1.0, 1.0, 0.0]];
    let mut tags = vec![NodeTag::Boundary; 4];
    for _ in 0..interior {
        nodes.push([rng.gen_range(-0.95..0.95), rng.gen_range(-0.95..0.95), 0.0]);
        tags.push(NodeTag::Interior);
    }
    let a: f64 = rng.gen_range(0.2..1.0);
    let b: [f64; 2] = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
    let values: Vec<f64> = nodes
        .iter()
        .map(|p| a * (p[0] * p[0] + p[1] * p[1]) + (b[0] * p[0] + b[1] * p[1]).abs() + rng.gen_range(0.0..0.05))
        .collect();
    let cloud = PointCloud::new(2, nodes, tags).map_err(err)?;
    lower_convex_envelope(&cloud, &values).map_err(err)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let resolution = 0.01;
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..100 {
        let f = random_instance(&mut rng)?;
        let region = Region::everything();
        let exact = ma_measure(&f, &region).map_err(err)?;
        let raster = subgradient_oracle(&f, &region, resolution);
        let gap = (exact - raster).abs();
        let allowed = 0.02 * exact + resolution * resolution;
        worst = worst.max(gap / allowed);
        if gap > allowed {
            failures += 1;
        }
    }
    Ok(Verdict::new(
        failures == 0,
        format!("100 instances, {failures} disagreements, worst gap / allowance {worst:.3}"),
    ))
}

fn property_suites() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut bicon: f64 = 0.0;
    for _ in 0..20 {
        let f = random_instance(&mut rng)?;
        let g = legendre_transform(&f).map_err(err)?;
        for i in 0..f.len() {
            if f.is_active(i) {
                bicon = bicon.max((g.conjugate_at(&f.cloud().node(i)) - f.envelope_values()[i]).abs());
            }
        }
    }
    pass &= bicon <= 1e-9;
    notes.push(format!("biconjugation {bicon:.1e}"));

    let mut spec = ScenarioSpec::preset(ScenarioKind::Segment, 2);
    spec.h0 = 0.2;
    spec.h_min = 0.1;
    let problem = build_problem(&spec).map_err(err)?;
    for mode in [SolverMode::Newton, SolverMode::GaussSeidel, SolverMode::Jacobi] {
        let options = SolveOptions {
            mode,
            tol: if mode == SolverMode::Newton { 1e-9 } else { 5e-2 },
            max_iter: 2000,
        };
        let s = solve(&problem, &options).map_err(err)?;
        let ok = s.history.iter().all(|h| h.monotone && h.feasible);
        pass &= ok;
        notes.push(format!("{} sweeps monotone and feasible: {ok}", mode.as_str()));
    }

    let shape = ShapeSpec::new(ShapeName::FramedDiamond);
    let dual = solve_dual(&shape.source_polygon(), &shape.sample(400).map_err(err)?, &DualOptions::default()).map_err(err)?;
    let tiling = dual.history.iter().map(|h| h.tiling).fold(0.0, f64::max);
    let decreasing = dual.history.windows(2).all(|w| w[1].residual < w[0].residual);
    pass &= tiling <= 1e-9 && decreasing;
    notes.push(format!("tiling {tiling:.1e}, residual decreasing {decreasing}"));

    let identical = deterministic_reruns()?;
    pass &= identical;
    notes.push(format!("byte-identical reruns {identical}"));
    Ok(Verdict::new(pass, notes.join("; ")))
}

fn deterministic_reruns() -> Result<bool, String> {
    let mut configs = Vec::new();
    let mut interp = RunConfig::new(Command::Interp);
    interp.ot.example = ShapeName::Pacman;
    interp.ot.sites = 300;
    configs.push(interp);
    let mut solve = RunConfig::new(Command::Solve);
    let mut spec = ScenarioSpec::preset(ScenarioKind::Cross, 2);
    spec.h0 = 0.1;
    spec.h_min = 0.05;
    solve.scenario = Some(spec);
    configs.push(solve);
    for mut c in configs {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(err)?;
            c.output = dir.path().to_path_buf();
            let report = run(&c).map_err(err)?;
            let mut files = Vec::new();
            for name in &report.payload.artifacts {
                if name != "report.json" && name != "config.toml" {
                    files.push(fs::read(dir.path().join(name)).map_err(err)?);
                }
            }
            let mut payload = report.payload.clone();
            payload.config.output = Default::default();
            outputs.push((files, serde_json_string(&payload)));
        }
        if outputs[0] != outputs[1] {
            return Ok(false);
        }
    }
    Ok(true)
}

fn serde_json_string(p: &malab::report::Payload) -> String {
    let report = malab::report::RunReport {
        payload: p.clone(),
        elapsed_seconds: 0.0,
    };
    report.payload_json()
}

fn interaction_constant() -> Outcome {
    let samples = grid4(-1.0, 1.0, 9);
    match find_c_star(&samples) {
        Ok(s) => {
            let pass = s.at_c_star.min_det >= 1.0 && s.at_quarter.min_det < 1.0;
            Ok(Verdict::new(
                pass,
                format!(
                    "C* = {:.6e}, min det at C* {:.4e}, at C*/4 {:.4e}",
                    s.c_star, s.at_c_star.min_det, s.at_quarter.min_det
                ),
            ))
        }
        Err(malab::Error::NonConvergence { iterations, .. }) => {
            let at_one = hessian_det_check(1.0, &samples).map_err(err)?;
            let z = at_one.argmin[3];
            Ok(Verdict::new(
                false,
                format!(
                    "no constant reaches min det >= 1 after {iterations} doublings; at C = 1 the minimum is {:.3e} at z = {z} (exact {:.3e})",
                    at_one.min_det,
                    interaction_det_exact(1.0, z)
                ),
            ))
        }
        Err(e) => Err(err(e)),
    }
}

fn main() {
    let criteria: [Criterion; 13] = [
        (1, "barrier calibration", barrier_calibration),
        (2, "line singularity measure", caffarelli_measure),
        (3, "admissibility chain", admissibility_chain),
        (4, "segment obstacle", segment_scenario),
        (5, "square skeleton obstacle", polytope_scenario),
        (6, "orthogonal cross obstacle", cross_scenario),
        (7, "circle obstacle", circle_scenario),
        (8, "transport split ball", split_ball),
        (9, "transport framed diamond", framed_diamond),
        (10, "transport pacman and cat's eye", pacman_cats_eye),
        (11, "oracle equivalence", oracle_equivalence),
        (12, "property suites", property_suites),
        (13, "interaction barrier constant", interaction_constant),
    ];
    let failed = run_all(&criteria, &filter_from_args());
    if !failed.is_empty() {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
