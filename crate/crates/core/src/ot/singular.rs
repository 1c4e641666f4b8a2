use serde::Serialize;

use super::dual::DualSolution;
use super::shape::apply;
use crate::geom::{self, P2};
use crate::power::PowerEdge;
use crate::{Error, Result};

/// Default jump threshold.
pub const TAU: f64 = 0.3;

/// A power-diagram edge across which the transport map jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularEdge {
    pub i: usize,
    pub j: usize,
    pub a: P2,
    pub b: P2,
    /// Density of the singular part: the jump `|p_i − p_j|`.
    pub f: f64,
}

impl SingularEdge {
    pub fn midpoint(&self) -> P2 {
        [0.5 * (self.a[0] + self.b[0]), 0.5 * (self.a[1] + self.b[1])]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularGraph {
    pub tau: f64,
    pub cell_size: f64,
    /// Edges above threshold that persist at the finer level.
    pub edges: Vec<SingularEdge>,
    /// Edges above threshold before the persistence filter.
    pub candidates: usize,
}

impl SingularGraph {
    /// Endpoints and midpoints of all edges.
    pub fn points(&self) -> Vec<P2> {
        self.edges.iter().flat_map(|e| [e.a, e.midpoint(), e.b]).collect()
    }

    /// Edges chained into polylines through shared endpoints.
    pub fn polylines(&self) -> Vec<Vec<P2>> {
        let tol = 1e-9 * self.cell_size.max(1e-300);
        let same = |p: P2, q: P2| geom::dist(p, q) <= tol;
        let mut used = vec![false; self.edges.len()];
        let mut out = Vec::new();
        for start in 0..self.edges.len() {
            if used[start] {
                continue;
            }
            used[start] = true;
            let mut line = vec![self.edges[start].a, self.edges[start].b];
            for forward in [true, false] {
                loop {
                    let end = if forward { line[line.len() - 1] } else { line[0] };
                    let next = (0..self.edges.len()).find(|&k| {
                        !used[k] && (same(self.edges[k].a, end) || same(self.edges[k].b, end))
                    });
                    let Some(k) = next else { break };
                    used[k] = true;
                    let e = self.edges[k];
                    let other = if same(e.a, end) { e.b } else { e.a };
                    if forward {
                        line.push(other);
                    } else {
                        line.insert(0, other);
                    }
                }
            }
            out.push(line);
        }
        out
    }
}

fn jump_edges(dual: &DualSolution, edges: &[PowerEdge], tau: f64) -> Vec<SingularEdge> {
    edges
        .iter()
        .map(|e| SingularEdge {
            i: e.i,
            j: e.j,
            a: e.a,
            b: e.b,
            f: geom::dist(dual.sites[e.i], dual.sites[e.j]),
        })
        .filter(|e| e.f > tau)
        .collect()
}

/// Power edges of `coarse` with jump above `tau` that have a jump edge of
/// `fine` within two coarse cell sizes carrying a jump within 50%.
pub fn detect_singular_set(coarse: &DualSolution, fine: &DualSolution, tau: f64) -> Result<SingularGraph> {
    if coarse.source != fine.source {
        return Err(Error::Config("ladder levels use different sources".into()));
    }
    if fine.len() <= coarse.len() {
        return Err(Error::Config(format!(
            "finer level must have more sites ({} vs {})",
            fine.len(),
            coarse.len()
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::Config(format!("threshold must be positive, got {tau}")));
    }
    let cell_size = coarse.cell_size();
    let coarse_edges = jump_edges(coarse, &coarse.diagram()?.edges, tau);
    let fine_edges = jump_edges(fine, &fine.diagram()?.edges, tau);
    let edges: Vec<SingularEdge> = coarse_edges
        .iter()
        .filter(|e| {
            let m = e.midpoint();
            fine_edges
                .iter()
                .any(|g| geom::point_segment_dist(m, g.a, g.b) <= 2.0 * cell_size && (g.f - e.f).abs() <= 0.5 * e.f)
        })
        .copied()
        .collect();
    Ok(SingularGraph {
        tau,
        cell_size,
        candidates: coarse_edges.len(),
        edges,
    })
}

/// Largest distance from a point of `points` to the set `target`, given as a
/// distance function.
pub fn directed_distance(points: &[P2], target: impl Fn(P2) -> f64) -> f64 {
    points.iter().map(|p| target(*p)).fold(0.0, f64::max)
}

/// Largest distance from a point of `points` to the polyline set of `graph`.
pub fn distance_to_graph(points: &[P2], graph: &SingularGraph) -> f64 {
    directed_distance(points, |p| {
        graph
            .edges
            .iter()
            .map(|e| geom::point_segment_dist(p, e.a, e.b))
            .fold(f64::INFINITY, f64::min)
    })
}

/// Worst symmetric Hausdorff distance between the graph and its images under `maps`.
pub fn symmetry_distance(graph: &SingularGraph, maps: &[[[f64; 2]; 2]]) -> f64 {
    let points = graph.points();
    maps.iter()
        .map(|m| {
            let image: Vec<P2> = points
                .iter()
                .map(|p| apply(*m, *p))
                .collect();
            distance_to_graph(&image, graph)
        })
        .fold(0.0, f64::max)
}
