use serde::Serialize;

use super::scenario::{DiscreteProblem, Piece, ScenarioKind};
use super::solver::DiscreteSolution;
use crate::geom::{self, P2};
use crate::power::power_diagram;
use crate::Result;

/// Singular density sample at one support node.
#[derive(Debug, Clone, Serialize)]
pub struct DensitySample {
    pub node: usize,
    pub piece: usize,
    /// Coordinates along the piece.
    pub s: Vec<f64>,
    /// `atom − μ`.
    pub excess: f64,
    /// Measure of the node's Voronoi cell inside the piece.
    pub cell: f64,
    /// `excess / cell`.
    pub f: f64,
    /// Whether the node lies in the region where positivity is asserted.
    pub inner: bool,
}

/// Excess at a node shared by several pieces, such as the centre of a cross.
#[derive(Debug, Clone, Serialize)]
pub struct Junction {
    pub node: usize,
    pub pieces: Vec<usize>,
    pub excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityProfile {
    pub samples: Vec<DensitySample>,
    pub junctions: Vec<Junction>,
    /// Extremes of `f` over the inner samples (`NaN` without inner samples).
    pub f_min: f64,
    pub f_max: f64,
    /// Total excess over all support nodes.
    pub singular_mass: f64,
}

/// Reads the singular part of the Monge–Ampère measure off the atom excess at
/// support nodes, divided by the size of each node's cell along the support.
pub fn extract_singular_density(problem: &DiscreteProblem, solution: &DiscreteSolution) -> Result<DensityProfile> {
    let support = &problem.support;
    let excess = |i: usize| solution.atoms.atoms[i] - problem.mu[i];
    let mut samples = Vec::new();
    let mut junctions = Vec::new();
    for (k, &i) in support.nodes.iter().enumerate() {
        if support.membership[k].len() > 1 {
            junctions.push(Junction {
                node: i,
                pieces: support.membership[k].clone(),
                excess: excess(i),
            });
        }
    }
    for (pi, piece) in support.pieces.iter().enumerate() {
        let members: Vec<usize> = support
            .nodes
            .iter()
            .enumerate()
            .filter(|(k, _)| support.membership[*k] == [pi])
            .map(|(_, &i)| i)
            .collect();
        let shared: Vec<usize> = support
            .nodes
            .iter()
            .enumerate()
            .filter(|(k, _)| support.membership[*k].len() > 1 && support.membership[*k].contains(&pi))
            .map(|(_, &i)| i)
            .collect();
        let all: Vec<usize> = members.iter().chain(&shared).copied().collect();
        let coords: Vec<Vec<f64>> = all.iter().map(|&i| piece.coords(&problem.cloud.node(i))).collect();
        let cells = piece_cells(piece, &coords)?;
        for (k, &i) in all.iter().enumerate().take(members.len()) {
            let e = excess(i);
            samples.push(DensitySample {
                node: i,
                piece: pi,
                s: coords[k].clone(),
                excess: e,
                cell: cells[k],
                f: e / cells[k],
                inner: is_inner(problem, i),
            });
        }
    }
    samples.sort_by(|a, b| {
        a.piece
            .cmp(&b.piece)
            .then_with(|| a.s.partial_cmp(&b.s).unwrap_or(std::cmp::Ordering::Equal))
    });
    let inner: Vec<f64> = samples.iter().filter(|s| s.inner).map(|s| s.f).collect();
    let (f_min, f_max) = if inner.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (
            inner.iter().copied().fold(f64::INFINITY, f64::min),
            inner.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let singular_mass = support.nodes.iter().map(|&i| excess(i)).sum();
    Ok(DensityProfile {
        samples,
        junctions,
        f_min,
        f_max,
        singular_mass,
    })
}

fn is_inner(problem: &DiscreteProblem, i: usize) -> bool {
    let Some(spec) = &problem.spec else {
        return true;
    };
    let x = problem.cloud.node(i);
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    match spec.kind {
        ScenarioKind::SmoothBoundary => true,
        _ => r <= spec.alpha * spec.eps * (1.0 + 1e-12),
    }
}

/// One-dimensional Voronoi lengths (segments and loops) or clipped planar
/// Voronoi areas (disks) of the given piece coordinates.
fn piece_cells(piece: &Piece, coords: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = coords.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    match piece {
        Piece::Segment { a, b } => {
            let half = 0.5 * ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2) + (b[2] - a[2]).powi(2)).sqrt();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&p, &q| coords[p][0].total_cmp(&coords[q][0]));
            let mut out = vec![0.0; m];
            for (k, &idx) in order.iter().enumerate() {
                let left = if k == 0 { -half } else { 0.5 * (coords[order[k - 1]][0] + coords[idx][0]) };
                let right = if k + 1 == m {
                    half
                } else {
                    0.5 * (coords[order[k + 1]][0] + coords[idx][0])
                };
                out[idx] = right - left;
            }
            Ok(out)
        }
        Piece::Loop { radius, .. } => {
            let length = 2.0 * std::f64::consts::PI * radius;
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&p, &q| coords[p][0].total_cmp(&coords[q][0]));
            let mut out = vec![0.0; m];
            for (k, &idx) in order.iter().enumerate() {
                let prev = coords[order[(k + m - 1) % m]][0];
                let next = coords[order[(k + 1) % m]][0];
                let s = coords[idx][0];
                let back = (s - prev).rem_euclid(length);
                let ahead = (next - s).rem_euclid(length);
                out[idx] = if m == 1 { length } else { 0.5 * (back + ahead) };
            }
            Ok(out)
        }
        Piece::Disk { radius, .. } => {
            let sites: Vec<P2> = coords.iter().map(|c| [c[0], c[1]]).collect();
            let domain = geom::regular_polygon([0.0, 0.0], *radius, 256);
            Ok(power_diagram(&sites, &vec![0.0; m], &domain)?.areas)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_cells_tile_the_segment() {
        let piece = Piece::Segment {
            a: [0.0, -1.0, 0.0],
            b: [0.0, 1.0, 0.0],
        };
        let coords: Vec<Vec<f64>> = [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|s| vec![*s]).collect();
        let cells = piece_cells(&piece, &coords).unwrap();
        assert_eq!(cells, vec![0.25, 0.5, 0.5, 0.5, 0.25]);
    }

    #[test]
    fn loop_cells_tile_the_circle() {
        let piece = Piece::Loop {
            center: [0.0; 3],
            radius: 1.0,
        };
        let coords: Vec<Vec<f64>> = (0..8).map(|k| vec![k as f64 * std::f64::consts::PI / 4.0]).collect();
        let cells = piece_cells(&piece, &coords).unwrap();
        let total: f64 = cells.iter().sum();
        assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
