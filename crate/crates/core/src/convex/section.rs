use serde::Serialize;

use super::cloud::Point;
use super::function::PLConvexFunction;
use super::measure::Region;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Section {
    /// Nodes with `u(x) < u(p) + ⟨q, x − p⟩ + h`.
    pub region: Region,
    /// Lebesgue volume of the sublevel set of the piecewise linear function.
    pub volume: f64,
    /// Set when the section reaches a boundary node.
    pub clipped: bool,
    /// The slope `q` used: the mean of the incident facet gradients.
    pub subgradient: Point,
}

/// Section of height `h` at node `p`.
pub fn section(f: &PLConvexFunction, p: usize, h: f64) -> Result<Section> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("section height must be positive, got {h}")));
    }
    if p >= f.len() || !f.is_active(p) {
        return Err(Error::Config(format!("section base node {p} is not an active node")));
    }
    let q = f
        .mean_subgradient(p)
        .ok_or_else(|| Error::Geometry(format!("node {p} has no incident facet")))?;
    let nodes = f.cloud().nodes();
    let u = f.envelope_values();
    let xp = nodes[p];
    let excess = |i: usize| {
        let x = nodes[i];
        u[i] - u[p] - q[0] * (x[0] - xp[0]) - q[1] * (x[1] - xp[1]) - q[2] * (x[2] - xp[2]) - h
    };
    let mut ids = Vec::new();
    let mut clipped = false;
    for i in 0..f.len() {
        if f.is_active(i) && excess(i) < 0.0 {
            ids.push(i);
            clipped |= f.cloud().tag(i).is_boundary();
        }
    }
    let volume = f
        .facets()
        .iter()
        .map(|facet| {
            let d: Vec<f64> = facet.nodes.iter().map(|&i| excess(i)).collect();
            let x: Vec<Point> = facet.nodes.iter().map(|&i| nodes[i]).collect();
            negative_volume(&x, &d, facet.volume)
        })
        .sum();
    Ok(Section {
        region: Region::Nodes(ids),
        volume,
        clipped,
        subgradient: q,
    })
}

/// Volume of `{d < 0}` in a simplex where `d` is affine with vertex values `d`.
fn negative_volume(x: &[Point], d: &[f64], volume: f64) -> f64 {
    let neg: Vec<usize> = (0..d.len()).filter(|&k| d[k] < 0.0).collect();
    let pos: Vec<usize> = (0..d.len()).filter(|&k| d[k] >= 0.0).collect();
    if neg.is_empty() {
        return 0.0;
    }
    if pos.is_empty() {
        return volume;
    }
    // Fraction cut off around a single vertex on one side.
    let corner = |k: usize, others: &[usize]| -> f64 { others.iter().map(|&j| d[k] / (d[k] - d[j])).product() };
    if neg.len() == 1 {
        return volume * corner(neg[0], &pos);
    }
    if pos.len() == 1 {
        return volume * (1.0 - corner(pos[0], &neg));
    }
    // Tetrahedron split two against two: the negative part is a prism.
    let cut = |a: usize, b: usize| -> Point {
        let t = d[a] / (d[a] - d[b]);
        [
            x[a][0] + t * (x[b][0] - x[a][0]),
            x[a][1] + t * (x[b][1] - x[a][1]),
            x[a][2] + t * (x[b][2] - x[a][2]),
        ]
    };
    let (a, b) = (neg[0], neg[1]);
    let (c, e) = (pos[0], pos[1]);
    let (ac, ae, bc, be) = (cut(a, c), cut(a, e), cut(b, c), cut(b, e));
    tet_volume(&x[a], &ac, &ae, &x[b]) + tet_volume(&ac, &ae, &x[b], &bc) + tet_volume(&ae, &x[b], &bc, &be)
}

fn tet_volume(a: &Point, b: &Point, c: &Point, d: &Point) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let w = [d[0] - a[0], d[1] - a[1], d[2] - a[2]];
    (u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) + u[2] * (v[0] * w[1] - v[1] * w[0])).abs()
        / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{lower_convex_envelope, NodeTag, PointCloud};

    fn disk_grid(h: f64, f: impl Fn(f64, f64) -> f64) -> PLConvexFunction {
        let n = (1.0 / h).round() as i64;
        let mut nodes = Vec::new();
        let mut tags = Vec::new();
        for i in -n..=n {
            for j in -n..=n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                nodes.push([x, y, 0.0]);
                tags.push(if i.abs() == n || j.abs() == n {
                    NodeTag::Boundary
                } else {
                    NodeTag::Interior
                });
            }
        }
        let vals: Vec<f64> = nodes.iter().map(|p| f(p[0], p[1])).collect();
        lower_convex_envelope(&PointCloud::new(2, nodes, tags).unwrap(), &vals).unwrap()
    }

    #[test]
    fn paraboloid_section_is_a_disk() {
        let f = disk_grid(0.02, |x, y| 0.5 * (x * x + y * y));
        let centre = (0..f.len()).find(|&i| f.cloud().node(i) == [0.0, 0.0, 0.0]).unwrap();
        let s = section(&f, centre, 0.1).unwrap();
        assert!((s.volume - 0.2 * std::f64::consts::PI).abs() < 0.02);
        assert!(!s.clipped);
    }

    #[test]
    fn affine_section_is_clipped() {
        let f = disk_grid(0.1, |x, y| x - 2.0 * y);
        let s = section(&f, 5, 0.01).unwrap();
        assert!(s.clipped);
        assert!((s.volume - 4.0).abs() < 1e-12);
    }

    #[test]
    fn tetrahedron_halves_tile() {
        let x = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let v = 1.0 / 6.0;
        for d in [[-1.0, -0.5, 2.0, 0.3], [-1.0, 0.5, 2.0, 0.3], [-1.0, -0.5, -2.0, 0.3]] {
            let flip: Vec<f64> = d.iter().map(|t| -t).collect();
            let total = negative_volume(&x, &d, v) + negative_volume(&x, &flip, v);
            assert!((total - v).abs() < 1e-14);
        }
        let d: Vec<f64> = x.iter().map(|p| p[0] + p[1] - 0.5).collect();
        assert!((negative_volume(&x, &d, v) - 1.0 / 12.0).abs() < 1e-14);
    }
}
