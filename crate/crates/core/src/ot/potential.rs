use std::collections::BTreeMap;

use super::dual::DualSolution;
use crate::convex::{lower_convex_envelope, NodeTag, PLConvexFunction, PointCloud};
use crate::geom::{self, P2};
use crate::Result;

/// `u(x) = max_i ⟨x, p_i⟩ − (|p_i|² − ψ_i)/2`.
pub fn potential_value(dual: &DualSolution, x: P2) -> f64 {
    dual.sites
        .iter()
        .zip(&dual.weights)
        .map(|(p, w)| affine_piece(*p, *w, x))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn affine_piece(p: P2, w: f64, x: P2) -> f64 {
    geom::dot(x, p) - 0.5 * (geom::dot(p, p) - w)
}

/// The Brenier potential on the source as a piecewise-linear convex function
/// sampled at the vertices of the power cells, where it is exact.
pub fn brenier_potential(dual: &DualSolution) -> Result<PLConvexFunction> {
    let diagram = dual.diagram()?;
    let scale = dual
        .source
        .iter()
        .map(|v| v[0].abs().max(v[1].abs()))
        .fold(1.0, f64::max);
    let quantum = 1e-11 * scale;
    let mut vertices: BTreeMap<(i64, i64), P2> = BTreeMap::new();
    for v in dual.source.iter().chain(diagram.cells.iter().flat_map(|c| c.verts.iter())) {
        let key = ((v[0] / quantum).round() as i64, (v[1] / quantum).round() as i64);
        vertices.entry(key).or_insert(*v);
    }
    let nodes: Vec<[f64; 3]> = vertices.values().map(|v| [v[0], v[1], 0.0]).collect();
    let tags: Vec<NodeTag> = vertices
        .values()
        .map(|v| {
            if geom::dist_to_boundary(&dual.source, *v) <= 1e-9 * scale {
                NodeTag::Boundary
            } else {
                NodeTag::Interior
            }
        })
        .collect();
    let values: Vec<f64> = vertices.values().map(|v| potential_value(dual, *v)).collect();
    lower_convex_envelope(&PointCloud::new(2, nodes, tags)?, &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot::dual::{solve_dual, DualOptions};
    use crate::ot::shape::{ShapeName, ShapeSpec};

    #[test]
    fn gradient_at_cell_centroid_is_the_site() {
        let spec = ShapeSpec::new(ShapeName::SplitBall);
        let dual = solve_dual(&spec.source_polygon(), &spec.sample(200).unwrap(), &DualOptions::default()).unwrap();
        let diagram = dual.diagram().unwrap();
        for (i, cell) in diagram.cells.iter().enumerate() {
            let c = geom::centroid(&cell.verts);
            let h = 1e-7;
            let gx = (potential_value(&dual, [c[0] + h, c[1]]) - potential_value(&dual, [c[0] - h, c[1]])) / (2.0 * h);
            let gy = (potential_value(&dual, [c[0], c[1] + h]) - potential_value(&dual, [c[0], c[1] - h])) / (2.0 * h);
            assert!((gx - dual.sites[i][0]).abs() < 1e-6 && (gy - dual.sites[i][1]).abs() < 1e-6);
            assert_eq!(dual.cell_of(c), i);
        }
    }

    #[test]
    fn single_site_potential_is_affine() {
        let source = geom::square(-1.0, 1.0);
        let samples = crate::ot::SampleSet {
            sites: vec![[0.5, -0.25]],
            masses: vec![4.0],
        };
        let dual = solve_dual(&source, &samples, &DualOptions::default()).unwrap();
        let u = brenier_potential(&dual).unwrap();
        assert_eq!(u.facets().len(), 2);
        for f in u.facets() {
            assert!((f.gradient[0] - 0.5).abs() < 1e-12 && (f.gradient[1] + 0.25).abs() < 1e-12);
        }
    }
}
