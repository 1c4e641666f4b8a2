use std::collections::HashMap;

use super::cloud::{NodeTag, Point, PointCloud};
use super::function::{lower_convex_envelope, PLConvexFunction};
use crate::geom::{self, LabeledPolygon};
use crate::Result;

/// Discrete Legendre transform `u*(p) = max_i ⟨p, x_i⟩ − u(x_i)`.
///
/// The result lives on a cloud in gradient space: the vertices of the cells
/// `{p : node i attains the max}` of every active node, cut to a box around the
/// facet gradients. Cells of boundary nodes are unbounded and end at the box,
/// so the transform is only available on that box; `value_at` further out is a
/// range error.
pub fn legendre_transform(f: &PLConvexFunction) -> Result<PLConvexFunction> {
    let dim = f.dim();
    let nodes = f.cloud().nodes();
    let u = f.envelope_values();

    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for facet in f.facets() {
        for d in 0..dim {
            lo[d] = lo[d].min(facet.gradient[d]);
            hi[d] = hi[d].max(facet.gradient[d]);
        }
    }
    let extent = (0..dim).map(|d| hi[d] - lo[d]).fold(0.0, f64::max);
    let margin = (0.25 * extent).max(1.0);
    for d in 0..dim {
        lo[d] -= margin;
        hi[d] += margin;
    }

    let mut dual: Vec<Point> = Vec::new();
    let mut values = Vec::new();
    let mut seen: HashMap<[i64; 3], ()> = HashMap::new();
    let quantum = 1e-9 * (1.0 + (0..dim).map(|d| lo[d].abs().max(hi[d].abs())).fold(0.0, f64::max));

    for i in 0..f.len() {
        if !f.is_vertex(i) {
            continue;
        }
        let nb = f.neighbors(i);
        // ⟨p, x_j − x_i⟩ ≤ u_j − u_i for every neighbour j
        let normals: Vec<Point> = nb
            .iter()
            .map(|&j| [nodes[j][0] - nodes[i][0], nodes[j][1] - nodes[i][1], nodes[j][2] - nodes[i][2]])
            .collect();
        let offsets: Vec<f64> = nb.iter().map(|&j| u[j] - u[i]).collect();
        let verts = cell_vertices(dim, &lo, &hi, &normals, &offsets);
        for p in verts {
            let key = [
                (p[0] / quantum).round() as i64,
                (p[1] / quantum).round() as i64,
                (p[2] / quantum).round() as i64,
            ];
            if seen.insert(key, ()).is_some() {
                continue;
            }
            values.push(p[0] * nodes[i][0] + p[1] * nodes[i][1] + p[2] * nodes[i][2] - u[i]);
            dual.push(p);
        }
    }
    let tags = vec![NodeTag::Interior; dual.len()];
    let cloud = PointCloud::new(dim, dual, tags)?;
    lower_convex_envelope(&cloud, &values)
}

fn cell_vertices(dim: usize, lo: &Point, hi: &Point, normals: &[Point], offsets: &[f64]) -> Vec<Point> {
    if dim == 2 {
        let mut poly = LabeledPolygon::from_domain(&[[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]);
        for (k, (n, b)) in normals.iter().zip(offsets).enumerate() {
            poly.clip([n[0], n[1]], *b, k as i64);
        }
        return poly.verts.iter().map(|v| [v[0], v[1], 0.0]).collect();
    }
    let mut ns = normals.to_vec();
    let mut bs = offsets.to_vec();
    for d in 0..3 {
        let mut e = [0.0; 3];
        e[d] = 1.0;
        ns.push(e);
        bs.push(hi[d]);
        e[d] = -1.0;
        ns.push(e);
        bs.push(-lo[d]);
    }
    let verts = geom::halfspace_polytope_vertices(3, &ns, &bs);
    let mut out: Vec<Point> = Vec::new();
    for v in verts {
        if !out.iter().any(|w| (0..3).all(|d| (v[d] - w[d]).abs() < 1e-12)) {
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, f: impl Fn(f64, f64) -> f64) -> PLConvexFunction {
        let mut nodes = Vec::new();
        let mut vals = Vec::new();
        let mut tags = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                let x = -1.0 + 2.0 * i as f64 / n as f64;
                let y = -1.0 + 2.0 * j as f64 / n as f64;
                nodes.push([x, y, 0.0]);
                vals.push(f(x, y));
                tags.push(if i == 0 || j == 0 || i == n || j == n {
                    NodeTag::Boundary
                } else {
                    NodeTag::Interior
                });
            }
        }
        let c = PointCloud::new(2, nodes, tags).unwrap();
        lower_convex_envelope(&c, &vals).unwrap()
    }

    #[test]
    fn quadratic_is_nearly_self_dual() {
        let f = grid(20, |x, y| 0.5 * (x * x + y * y));
        let g = legendre_transform(&f).unwrap();
        for p in [[0.3, -0.2, 0.0], [0.0, 0.0, 0.0], [0.7, 0.5, 0.0]] {
            let v = g.value_at(&p).unwrap();
            let exact = 0.5 * (p[0] * p[0] + p[1] * p[1]);
            assert!((v - exact).abs() < 0.01, "{v} vs {exact}");
        }
    }

    #[test]
    fn cone_conjugate_vanishes_on_unit_square() {
        let f = grid(10, |x, y| x.abs() + y.abs());
        let g = legendre_transform(&f).unwrap();
        for p in [[0.5, 0.5, 0.0], [-0.9, 0.2, 0.0], [0.0, 0.0, 0.0]] {
            assert!(g.value_at(&p).unwrap().abs() < 1e-12);
        }
        assert!(g.value_at(&[50.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn biconjugate_recovers_active_values() {
        let f = grid(8, |x, y| (x - 0.2).powi(2) + 0.5 * y.abs() + x * y * 0.1);
        let g = legendre_transform(&f).unwrap();
        for i in 0..f.len() {
            if f.is_active(i) {
                let v = g.conjugate_at(&f.cloud().node(i));
                assert!((v - f.envelope_values()[i]).abs() < 1e-9);
            }
        }
    }
}
