use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cloud::Point;
use super::function::PLConvexFunction;
use crate::hull;
use crate::Result;

/// Subset of the domain used to accumulate Monge–Ampère mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Closed axis-aligned box.
    Rect { lo: Point, hi: Point },
    /// Closed ball.
    Ball { center: Point, radius: f64 },
    /// Points within `radius` of the segment `[a, b]`.
    Tube { a: Point, b: Point, radius: f64 },
    /// Explicit node indices.
    Nodes(Vec<usize>),
    /// Union of two regions.
    Union(Box<Region>, Box<Region>),
}

impl Region {
    pub fn contains(&self, index: usize, x: &Point) -> bool {
        match self {
            Region::Rect { lo, hi } => (0..3).all(|d| x[d] >= lo[d] && x[d] <= hi[d]),
            Region::Ball { center, radius } => dist(x, center) <= *radius,
            Region::Tube { a, b, radius } => segment_dist(x, a, b) <= *radius,
            Region::Nodes(ids) => ids.contains(&index),
            Region::Union(r, s) => r.contains(index, x) || s.contains(index, x),
        }
    }

    /// Everything (all nodes of any cloud).
    pub fn everything() -> Region {
        Region::Rect {
            lo: [f64::NEG_INFINITY; 3],
            hi: [f64::INFINITY; 3],
        }
    }
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn segment_dist(x: &Point, a: &Point, b: &Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let ax = [x[0] - a[0], x[1] - a[1], x[2] - a[2]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    let t = if len2 > 0.0 {
        ((ax[0] * ab[0] + ax[1] * ab[1] + ax[2] * ab[2]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(x, &[a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]])
}

/// Per-node Monge–Ampère atoms.
#[derive(Debug, Clone)]
pub struct MaAtomTable {
    /// Atom at each node; zero for boundary and inactive nodes.
    pub atoms: Vec<f64>,
    /// Finite part of the gradient image at boundary nodes (the hull of the
    /// incident facet gradients), kept out of the interior accounting.
    pub boundary_mass: Vec<f64>,
}

impl MaAtomTable {
    pub fn total(&self) -> f64 {
        self.atoms.iter().sum()
    }

    pub fn boundary_total(&self) -> f64 {
        self.boundary_mass.iter().sum()
    }
}

/// Atom at every node: volume of the convex hull of the gradients of the
/// facets incident to it.
pub fn ma_atoms(f: &PLConvexFunction) -> Result<MaAtomTable> {
    f.check_integrity()?;
    let dim = f.dim();
    let cells: Vec<f64> = (0..f.len())
        .into_par_iter()
        .map(|i| {
            if !f.is_vertex(i) {
                return 0.0;
            }
            hull::hull_volume(dim, &f.node_gradients(i))
        })
        .collect();
    let tags = f.cloud().tags();
    let mut atoms = vec![0.0; f.len()];
    let mut boundary_mass = vec![0.0; f.len()];
    for (i, v) in cells.into_iter().enumerate() {
        if tags[i].is_boundary() {
            boundary_mass[i] = v;
        } else {
            atoms[i] = v;
        }
    }
    Ok(MaAtomTable { atoms, boundary_mass })
}

/// Interior Monge–Ampère mass of the nodes inside `region`.
pub fn ma_measure(f: &PLConvexFunction, region: &Region) -> Result<f64> {
    let table = ma_atoms(f)?;
    Ok(measure_from_atoms(f, &table, region))
}

/// Same as [`ma_measure`] reusing a precomputed atom table.
pub fn measure_from_atoms(f: &PLConvexFunction, table: &MaAtomTable, region: &Region) -> f64 {
    let nodes = f.cloud().nodes();
    (0..f.len())
        .filter(|&i| region.contains(i, &nodes[i]))
        .map(|i| table.atoms[i])
        .sum()
}
