use std::f64::consts::PI;

use super::cloud::{Domain, NodeTag, Point, PointCloud};
use super::function::{lower_convex_envelope, PLConvexFunction};
use crate::Result;

/// Square lattice of spacing `mesh` strictly inside the disk of radius
/// `radius` about the origin (interior nodes), plus equally spaced boundary
/// nodes on the circle at roughly the same spacing.
pub fn disk_lattice(radius: f64, mesh: f64) -> Result<PointCloud> {
    let m = (radius / mesh).ceil() as i64;
    let mut nodes = Vec::new();
    let mut tags = Vec::new();
    for i in -m..=m {
        for j in -m..=m {
            let p = [i as f64 * mesh, j as f64 * mesh, 0.0];
            if (p[0] * p[0] + p[1] * p[1]).sqrt() < radius - 0.5 * mesh {
                nodes.push(p);
                tags.push(NodeTag::Interior);
            }
        }
    }
    let count = ((2.0 * PI * radius / mesh).ceil() as usize).max(8);
    for k in 0..count {
        let t = 2.0 * PI * k as f64 / count as f64;
        nodes.push([radius * t.cos(), radius * t.sin(), 0.0]);
        tags.push(NodeTag::Boundary);
    }
    PointCloud::new(2, nodes, tags)?.with_domain(Domain::Ball {
        center: [0.0; 3],
        radius,
    })
}

/// Lower convex envelope of `f` sampled at every node of `cloud`.
pub fn sample(cloud: &PointCloud, f: impl Fn(&Point) -> f64) -> Result<PLConvexFunction> {
    let values: Vec<f64> = cloud.nodes().iter().map(f).collect();
    lower_convex_envelope(cloud, &values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_contains_the_origin_and_the_axes() {
        let c = disk_lattice(1.0, 0.25).unwrap();
        assert!(c.nodes().contains(&[0.0, 0.0, 0.0]));
        assert!(c.nodes().contains(&[0.0, 0.5, 0.0]));
        assert!(c.tags().iter().any(|t| t.is_boundary()));
    }
}
