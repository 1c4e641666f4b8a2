use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::density::{extract_singular_density, DensityProfile};
use super::scenario::{DiscreteProblem, Piece, ScenarioKind};
use super::solver::DiscreteSolution;
use crate::barriers::{admissibility_check_chain, AdmissibilityReport, Chain};
use crate::convex::{flat_set_probe, section, Point};
use crate::check::Check;
use crate::Result;

/// Section volume ratio `|S_h|/h^{n/2}` at one support node.
#[derive(Debug, Clone, Serialize)]
pub struct SectionRatio {
    pub node: usize,
    pub h: f64,
    pub volume: f64,
    pub ratio: f64,
    pub clipped: bool,
}

/// Extent of a node's subgradient cell along the support, in units of the local spacing.
#[derive(Debug, Clone, Serialize)]
pub struct Thinness {
    pub node: usize,
    pub extent: f64,
    pub spacing: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub nodes: usize,
    pub iterations: usize,
    pub residual: f64,
    pub checks: Vec<Check>,
    pub density: DensityProfile,
    pub sections: Vec<SectionRatio>,
    /// Worst tangential subgradient extent at contact-boundary nodes; reported, not gating.
    pub thinness: Option<Thinness>,
    /// Inequality chain behind the barrier argument; reported, not gating.
    pub admissibility: Option<AdmissibilityReport>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Heights at which sections are measured.
pub const SECTION_HEIGHTS: [f64; 4] = [0.16, 0.08, 0.04, 0.02];
/// Cap on `atom/μ − 1` away from the support.
pub const OFF_SUPPORT_TOL: f64 = 0.05;
/// Cap on the violation of `D ≤ u ≤ W_n + 10`.
pub const SANDWICH_TOL: f64 = 1e-8;
/// Cap on the reflection-symmetry defect of the node values.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Runs every check of a solved scenario and extracts its singular density.
pub fn verify(problem: &DiscreteProblem, solution: &DiscreteSolution) -> Result<VerificationReport> {
    let n = problem.len();
    let dim = problem.dim();
    let nodes = problem.cloud.nodes();
    let u = &solution.values;
    let mut checks = Vec::new();

    if let Some(spec) = &problem.spec {
        let ball = if dim == 2 {
            PI * spec.radius.powi(2)
        } else {
            4.0 / 3.0 * PI * spec.radius.powi(3)
        };
        let total: f64 = problem.mu.iter().sum();
        checks.push(Check::at_most("mass_balance", (total - ball).abs() / ball, 0.005));
        let (mut below, mut above): (f64, f64) = (0.0, 0.0);
        for i in 0..n {
            below = below.max(problem.lower_barrier(&nodes[i]) - u[i]);
            above = above.max(u[i] - problem.upper_barrier(&nodes[i]));
        }
        checks.push(Check::at_most("sandwich_lower", below, SANDWICH_TOL));
        checks.push(Check::at_most("sandwich_upper", above, SANDWICH_TOL));
    }

    let over = (0..n)
        .filter(|&i| problem.obstacle[i].is_finite())
        .map(|i| u[i] - problem.obstacle[i])
        .fold(0.0f64, f64::max);
    checks.push(Check::at_most("obstacle_feasible", over, 0.0));

    let lifting_ok = solution.history.iter().all(|r| r.monotone && r.feasible);
    checks.push(Check::flag("monotone_lifting", lifting_ok));

    let support_pts: Vec<Point> = problem.support.nodes.iter().map(|&i| nodes[i]).collect();
    let dist_to_support = |x: &Point| {
        support_pts
            .iter()
            .map(|p| ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2) + (x[2] - p[2]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    };
    let off_support: Vec<usize> = (0..n)
        .filter(|&i| !problem.cloud.tag(i).is_boundary())
        .filter(|&i| dist_to_support(&nodes[i]) > 2.0 * problem.spacing[i])
        .collect();
    let off_residual = off_support
        .iter()
        .map(|&i| (solution.atoms.atoms[i] / problem.mu[i] - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most("off_support_residual", off_residual, OFF_SUPPORT_TOL));

    let density = extract_singular_density(problem, solution)?;
    if !problem.support.nodes.is_empty() {
        checks.push(Check::above("density_positive", density.f_min, 0.0));
    }

    if let Some(defect) = symmetry_defect(problem, u) {
        checks.push(Check::at_most("symmetry", defect, SYMMETRY_TOL));
    }

    let thinness = thinness(problem, solution);

    let flats = flat_set_probe(&solution.function, 1e-9);
    let interior_extreme = flats
        .iter()
        .filter(|piece| {
            piece.extreme_points.iter().any(|&(i, interior)| {
                interior && !problem.obstacle[i].is_finite() && dist_to_support(&nodes[i]) > 2.0 * problem.spacing[i]
            })
        })
        .count();
    checks.push(Check::at_most("no_interior_extreme_point", interior_extreme as f64, 0.0));

    let sections = section_ratios(problem, solution)?;
    if !sections.is_empty() {
        let worst = sections.iter().map(|s| s.ratio).fold(0.0, f64::max);
        checks.push(Check::at_most("section_scaling", worst, section_ratio_ceiling(problem.dim())));
    }

    let admissibility = match &problem.spec {
        Some(spec) if spec.eps < spec.rho && spec.rho < 1.0 => {
            let chain = match spec.kind {
                ScenarioKind::Segment => Some(Chain::Line),
                ScenarioKind::PolytopeSkeleton => Some(Chain::Polytope),
                ScenarioKind::Cross => Some(Chain::Cross {
                    directions: spec.directions.clone(),
                }),
                ScenarioKind::SmoothBoundary => None,
            };
            match chain {
                Some(c) => Some(admissibility_check_chain(&c, spec.n, spec.k, spec.eps, spec.rho, spec.alpha)?),
                None => None,
            }
        }
        _ => None,
    };

    Ok(VerificationReport {
        scenario: problem
            .spec
            .as_ref()
            .map(|s| s.kind.as_str().to_string())
            .unwrap_or_else(|| "custom".into()),
        nodes: n,
        iterations: solution.iterations(),
        residual: solution.residual,
        checks,
        density,
        sections,
        thinness,
        admissibility,
    })
}

/// Largest `|u(x) − u(σx)|` over the coordinate reflections and the swap of
/// the first two coordinates, restricted to those `σ` that map the node set
/// and the obstacle onto themselves; `None` if there is none.
pub fn symmetry_defect(problem: &DiscreteProblem, u: &[f64]) -> Option<f64> {
    let key = |p: &Point| -> [i64; 3] { [0, 1, 2].map(|d| (p[d] * 1e9).round() as i64) };
    let nodes = problem.cloud.nodes();
    let index: HashMap<[i64; 3], usize> = nodes.iter().enumerate().map(|(i, p)| (key(p), i)).collect();
    let mut worst: Option<f64> = None;
    let maps: Vec<Box<dyn Fn(&Point) -> Point>> = (0..problem.dim())
        .map(|axis| -> Box<dyn Fn(&Point) -> Point> {
            Box::new(move |p: &Point| {
                let mut q = *p;
                q[axis] = -q[axis];
                q
            })
        })
        .chain(std::iter::once(Box::new(|p: &Point| [p[1], p[0], p[2]]) as Box<dyn Fn(&Point) -> Point>))
        .collect();
    for map in &maps {
        let mut defect = 0.0f64;
        let mut symmetric = true;
        for (i, p) in nodes.iter().enumerate() {
            let q = map(p);
            let Some(&j) = index.get(&key(&q)) else {
                symmetric = false;
                break;
            };
            let (gi, gj) = (problem.obstacle[i], problem.obstacle[j]);
            if gi.is_finite() != gj.is_finite() || (gi.is_finite() && (gi - gj).abs() > 1e-12 * (1.0 + gi.abs())) {
                symmetric = false;
                break;
            }
            defect = defect.max((u[i] - u[j]).abs());
        }
        if symmetric {
            worst = Some(worst.unwrap_or(0.0).max(defect));
        }
    }
    worst
}

/// Largest subgradient extent along the support tangent, relative to the local
/// spacing, over support nodes on the edge of the contact set.
fn thinness(problem: &DiscreteProblem, solution: &DiscreteSolution) -> Option<Thinness> {
    let f = &solution.function;
    let nodes = problem.cloud.nodes();
    let support: std::collections::HashSet<usize> = problem.support.nodes.iter().copied().collect();
    let mut worst: Option<Thinness> = None;
    for (k, &i) in problem.support.nodes.iter().enumerate() {
        if !solution.contact[i] {
            continue;
        }
        let edge = f
            .neighbors(i)
            .iter()
            .any(|&j| support.contains(&j) && !solution.contact[j]);
        if !edge {
            continue;
        }
        let grads = f.node_gradients(i);
        let mut extent = 0.0f64;
        for &pi in &problem.support.membership[k] {
            for t in tangents(&problem.support.pieces[pi], &nodes[i]) {
                let proj: Vec<f64> = grads.iter().map(|g| g[0] * t[0] + g[1] * t[1] + g[2] * t[2]).collect();
                let lo = proj.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                extent = extent.max(hi - lo);
            }
        }
        let spacing = problem.spacing[i];
        let ratio = extent / spacing;
        if worst.as_ref().is_none_or(|w| ratio > w.ratio) {
            worst = Some(Thinness {
                node: i,
                extent,
                spacing,
                ratio,
            });
        }
    }
    worst
}

fn tangents(piece: &Piece, x: &Point) -> Vec<Point> {
    match piece {
        Piece::Segment { a, b } => {
            let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let l = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            vec![[d[0] / l, d[1] / l, d[2] / l]]
        }
        Piece::Loop { center, .. } => {
            let t = (x[1] - center[1]).atan2(x[0] - center[0]);
            vec![[-t.sin(), t.cos(), 0.0]]
        }
        Piece::Disk { axis, .. } => (0..3)
            .filter(|d| d != axis)
            .map(|d| {
                let mut e = [0.0; 3];
                e[d] = 1.0;
                e
            })
            .collect(),
    }
}

/// `|S_h|/h^{n/2}` of the quadratic `|x|²/2`, whose Monge–Ampère density is one.
pub fn section_ratio_ceiling(dim: usize) -> f64 {
    match dim {
        2 => 2.0 * PI,
        _ => 4.0 / 3.0 * PI * 2f64.powf(1.5),
    }
}

/// Section ratios at the support node closest to the support centre, from
/// the largest height down.
fn section_ratios(problem: &DiscreteProblem, solution: &DiscreteSolution) -> Result<Vec<SectionRatio>> {
    let nodes = problem.cloud.nodes();
    let Some(&base) = problem.support.nodes.iter().min_by(|&&a, &&b| {
        let r = |i: usize| nodes[i][0].powi(2) + nodes[i][1].powi(2) + nodes[i][2].powi(2);
        r(a).total_cmp(&r(b))
    }) else {
        return Ok(Vec::new());
    };
    let half_dim = problem.dim() as f64 / 2.0;
    SECTION_HEIGHTS
        .iter()
        .map(|&h| {
            let s = section(&solution.function, base, h)?;
            Ok(SectionRatio {
                node: base,
                h,
                volume: s.volume,
                ratio: s.volume / h.powf(half_dim),
                clipped: s.clipped,
            })
        })
        .collect()
}
