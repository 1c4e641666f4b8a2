use serde::Serialize;

use super::dual::{solve_dual, DualOptions, DualSolution};
use super::shape::{radical_inverse, ShapeName, ShapeSpec};
use super::singular::{detect_singular_set, directed_distance, distance_to_graph, symmetry_distance, SingularGraph};
use super::reference::{split_ball_reference, SplitBallValue};
use crate::check::Check;
use crate::geom::{self, P2};
use crate::Result;

/// Tiling tolerance of the final power diagram.
pub const TILING_TOL: f64 = 1e-9;

/// Duals at `N` and `4N` sites and the singular graph detected between them.
#[derive(Debug, Clone, Serialize)]
pub struct Ladder {
    pub coarse: DualSolution,
    pub fine: DualSolution,
    pub graph: SingularGraph,
}

pub fn solve_ladder(spec: &ShapeSpec, sites: usize, options: &DualOptions, tau: f64) -> Result<Ladder> {
    let source = spec.source_polygon();
    let coarse = solve_dual(&source, &spec.sample(sites)?, options)?;
    let fine = solve_dual(&source, &spec.sample(4 * sites)?, options)?;
    let graph = detect_singular_set(&coarse, &fine, tau)?;
    Ok(Ladder { coarse, fine, graph })
}

#[derive(Debug, Clone, Serialize)]
pub struct OtReport {
    pub example: String,
    pub sites: usize,
    pub fine_sites: usize,
    pub cell_size: f64,
    pub steps: usize,
    pub fine_steps: usize,
    pub residual: f64,
    pub tiling: f64,
    /// Mean squared distance to the closed-form map (split ball only).
    pub map_error: Option<f64>,
    pub graph_edges: usize,
    pub graph_candidates: usize,
    /// `[x_min, x_max, y_min, y_max]` of the singular graph.
    pub graph_extent: Option<[f64; 4]>,
    /// Smallest and largest edge density.
    pub f_range: Option<[f64; 2]>,
    pub checks: Vec<Check>,
}

impl OtReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Mean squared distance between the discrete map and the split-ball map at
/// `count` Halton points of the source off the line `x = 0`.
pub fn split_ball_map_error(dual: &DualSolution, count: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut used = 0usize;
    let mut k = 1u64;
    while used < count {
        let p = [2.0 * radical_inverse(k, 2) - 1.0, 2.0 * radical_inverse(k, 3) - 1.0];
        k += 1;
        if !geom::in_convex_polygon(&dual.source, p, 0.0) || p[0] == 0.0 {
            continue;
        }
        if let SplitBallValue::Point { map, .. } = split_ball_reference(p)? {
            let t = dual.map(p);
            total += (t[0] - map[0]).powi(2) + (t[1] - map[1]).powi(2);
            used += 1;
        }
    }
    Ok(total / count as f64)
}

pub fn verify_ladder(spec: &ShapeSpec, ladder: &Ladder, tol: f64) -> Result<OtReport> {
    let Ladder { coarse, fine, graph } = ladder;
    let cs = coarse.cell_size();
    let diagram = coarse.diagram()?;
    let tiling = diagram.tiling_defect();
    let mut checks = vec![
        Check::at_most("dual_residual", coarse.residual.max(fine.residual), tol),
        Check::at_most("tiling", tiling, TILING_TOL),
        Check::above("singular_edges", graph.edges.len() as f64, 0.0),
    ];
    let points = graph.points();
    let extent = (!points.is_empty()).then(|| {
        points.iter().fold(
            [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY],
            |e, p| [e[0].min(p[0]), e[1].max(p[0]), e[2].min(p[1]), e[3].max(p[1])],
        )
    });
    let f_range = (!graph.edges.is_empty()).then(|| {
        graph
            .edges
            .iter()
            .fold([f64::INFINITY, f64::NEG_INFINITY], |r, e| [r[0].min(e.f), r[1].max(e.f)])
    });
    let mut map_error = None;
    let symmetric = !spec.symmetries().is_empty() && !graph.edges.is_empty();
    let near_axis = |p: P2| p[0].abs();
    match spec.name {
        ShapeName::SplitBall => {
            let err = split_ball_map_error(coarse, 4000)?;
            map_error = Some(err);
            checks.push(Check::at_most("map_error", err, (2.0 * cs).powi(2)));
            let to_segment = directed_distance(&points, |p| geom::point_segment_dist(p, [0.0, -1.0], [0.0, 1.0]));
            let samples: Vec<P2> = (0..=200).map(|k| [0.0, -1.0 + 0.01 * k as f64]).collect();
            let from_segment = if graph.edges.is_empty() {
                f64::INFINITY
            } else {
                distance_to_graph(&samples, graph)
            };
            checks.push(Check::at_most("hausdorff_to_segment", to_segment.max(from_segment), 2.0 * cs));
            let dev = graph.edges.iter().map(|e| (e.f - 2.0).abs() / 2.0).fold(0.0, f64::max);
            checks.push(Check::at_most("density_deviation", if graph.edges.is_empty() { f64::INFINITY } else { dev }, 0.1));
        }
        ShapeName::FramedDiamond => {
            let to_axes = directed_distance(&points, |p| p[0].abs().min(p[1].abs()));
            checks.push(Check::at_most("distance_to_axes", to_axes, 3.0 * cs));
            let on_x = graph.edges.iter().any(|e| e.midpoint()[1].abs() <= 3.0 * cs && e.f > 0.0);
            let on_y = graph.edges.iter().any(|e| e.midpoint()[0].abs() <= 3.0 * cs && e.f > 0.0);
            checks.push(Check::flag("density_on_both_axes", on_x && on_y));
        }
        ShapeName::SquareFrame => {
            let to_diagonals = directed_distance(&points, |p| (p[0].abs() - p[1].abs()).abs() / 2f64.sqrt());
            checks.push(Check::at_most("distance_to_diagonals", to_diagonals, 3.0 * cs));
        }
        ShapeName::Pacman => {
            checks.push(Check::at_most("distance_to_axis", directed_distance(&points, near_axis), 3.0 * cs));
            let lower = extent.map_or(-1.0, |e| e[2]);
            checks.push(Check::above("lower_endpoint_depth", 1.0 + lower, cs));
        }
        ShapeName::CatsEye => {
            checks.push(Check::at_most("distance_to_axis", directed_distance(&points, near_axis), 3.0 * cs));
            let top = points.iter().map(|p| p[1].abs()).fold(0.0, f64::max);
            checks.push(Check::at_most("max_abs_y", top, 0.9));
        }
        ShapeName::Custom => {}
    }
    if symmetric {
        checks.push(Check::at_most("graph_symmetry", symmetry_distance(graph, &spec.symmetries()), cs));
    }
    Ok(OtReport {
        example: spec.name.as_str().into(),
        sites: coarse.len(),
        fine_sites: fine.len(),
        cell_size: cs,
        steps: coarse.history.len(),
        fine_steps: fine.history.len(),
        residual: coarse.residual,
        tiling,
        map_error,
        graph_edges: graph.edges.len(),
        graph_candidates: graph.candidates,
        graph_extent: extent,
        f_range,
        checks,
    })
}
