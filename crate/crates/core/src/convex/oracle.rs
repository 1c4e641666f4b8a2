use rayon::prelude::*;

use super::cloud::Point;
use super::function::PLConvexFunction;
use super::measure::Region;

/// Relative slack of the duality test `u*(p) + u(x) = ⟨p, x⟩`.
pub const DUALITY_TOL: f64 = 1e-8;

/// Brute-force estimate of `|∂u(region)|`: rasterises the bounding box of the
/// facet gradients with cells of side `resolution` and counts cell centres `p`
/// that are subgradients at some interior node of `region`.
pub fn subgradient_oracle(f: &PLConvexFunction, region: &Region, resolution: f64) -> f64 {
    assert!(resolution > 0.0, "resolution must be positive");
    let dim = f.dim();
    let nodes = f.cloud().nodes();
    let u = f.envelope_values();
    let active: Vec<usize> = (0..f.len()).filter(|&i| f.is_active(i)).collect();
    let members: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&i| !f.cloud().tag(i).is_boundary() && region.contains(i, &nodes[i]))
        .collect();
    if members.is_empty() {
        return 0.0;
    }

    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for d in 0..dim {
        lo[d] = f64::INFINITY;
        hi[d] = f64::NEG_INFINITY;
    }
    for &i in &members {
        for g in f.node_gradients(i) {
            for d in 0..dim {
                lo[d] = lo[d].min(g[d]);
                hi[d] = hi[d].max(g[d]);
            }
        }
    }
    let mut counts = [1usize; 3];
    for d in 0..dim {
        lo[d] -= resolution;
        hi[d] += resolution;
        counts[d] = ((hi[d] - lo[d]) / resolution).ceil() as usize;
    }

    let pair = |p: &Point, i: usize| p[0] * nodes[i][0] + p[1] * nodes[i][1] + p[2] * nodes[i][2] - u[i];
    let hit = |p: &Point| {
        let star = active.iter().map(|&i| pair(p, i)).fold(f64::NEG_INFINITY, f64::max);
        members
            .iter()
            .any(|&i| star - pair(p, i) <= DUALITY_TOL * (1.0 + u[i].abs()))
    };

    let rows = counts[1] * counts[2];
    let per_row: Vec<usize> = (0..rows)
        .into_par_iter()
        .map(|r| {
            let (j, k) = (r % counts[1], r / counts[1]);
            let mut c = 0;
            for i in 0..counts[0] {
                let mut p = [0.0; 3];
                p[0] = lo[0] + (i as f64 + 0.5) * resolution;
                if dim >= 2 {
                    p[1] = lo[1] + (j as f64 + 0.5) * resolution;
                }
                if dim == 3 {
                    p[2] = lo[2] + (k as f64 + 0.5) * resolution;
                }
                if hit(&p) {
                    c += 1;
                }
            }
            c
        })
        .collect();
    per_row.iter().sum::<usize>() as f64 * resolution.powi(dim as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{lower_convex_envelope, NodeTag, PointCloud};

    #[test]
    fn cross_origin_has_unit_square_of_slopes() {
        let nodes: Vec<Point> = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
        ];
        let mut tags = vec![NodeTag::Boundary; 5];
        tags[0] = NodeTag::Interior;
        let vals: Vec<f64> = nodes.iter().map(|p| p[0].abs() + p[1].abs()).collect();
        let f = lower_convex_envelope(&PointCloud::new(2, nodes, tags).unwrap(), &vals).unwrap();
        let v = subgradient_oracle(&f, &Region::Nodes(vec![0]), 0.01);
        assert!((v - 4.0).abs() < 0.05, "{v}");
    }
}
