use serde::Serialize;

use super::cloud::Point;
use super::function::PLConvexFunction;
use crate::hull;

/// A maximal set of edge-connected facets sharing one affine piece.
#[derive(Debug, Clone, Serialize)]
pub struct FlatPiece {
    pub gradient: Point,
    pub facets: Vec<usize>,
    pub nodes: Vec<usize>,
    /// Largest distance between two nodes of the piece.
    pub diameter: f64,
    /// Extreme points of the contact set as `(node, interior)`; `interior` is
    /// false for nodes on the domain boundary.
    pub extreme_points: Vec<(usize, bool)>,
}

impl FlatPiece {
    pub fn has_interior_extreme_point(&self) -> bool {
        self.extreme_points.iter().any(|(_, interior)| *interior)
    }
}

/// Contact sets `{u = L}` of supporting affine functions that are larger than
/// a few mesh cells: groups of adjacent facets whose gradients agree within
/// `tol·(1 + |g|)` and whose diameter exceeds three median facet diameters.
pub fn flat_set_probe(f: &PLConvexFunction, tol: f64) -> Vec<FlatPiece> {
    let nodes = f.cloud().nodes();
    let facets = f.facets();
    let m = facets.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    for (a, b) in f.adjacent_facets() {
        let (ga, gb) = (facets[a].gradient, facets[b].gradient);
        let diff = ((ga[0] - gb[0]).powi(2) + (ga[1] - gb[1]).powi(2) + (ga[2] - gb[2]).powi(2)).sqrt();
        let scale = 1.0 + (ga[0] * ga[0] + ga[1] * ga[1] + ga[2] * ga[2]).sqrt();
        if diff <= tol * scale {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }

    let diam = |ids: &[usize]| {
        let mut d: f64 = 0.0;
        for (k, &i) in ids.iter().enumerate() {
            for &j in &ids[k + 1..] {
                let p = nodes[i];
                let q = nodes[j];
                d = d.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt());
            }
        }
        d
    };
    let mut facet_diams: Vec<f64> = facets.iter().map(|t| diam(&t.nodes)).collect();
    facet_diams.sort_by(f64::total_cmp);
    let median = facet_diams[facet_diams.len() / 2];

    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for t in 0..m {
        let r = find(&mut parent, t);
        groups.entry(r).or_default().push(t);
    }
    let mut out = Vec::new();
    for (_, members) in groups {
        if members.len() < 2 {
            continue;
        }
        let mut ids: Vec<usize> = members.iter().flat_map(|&t| facets[t].nodes.iter().copied()).collect();
        ids.sort_unstable();
        ids.dedup();
        let pts: Vec<Point> = ids.iter().map(|&i| nodes[i]).collect();
        let ext: Vec<usize> = hull::hull_vertex_indices(f.dim(), &pts).into_iter().map(|k| ids[k]).collect();
        let diameter = diam(&ext);
        if diameter <= 3.0 * median {
            continue;
        }
        let mut g = [0.0; 3];
        for &t in &members {
            for d in 0..3 {
                g[d] += facets[t].gradient[d] / members.len() as f64;
            }
        }
        out.push(FlatPiece {
            gradient: g,
            facets: members,
            nodes: ids,
            diameter,
            extreme_points: ext.iter().map(|&i| (i, !f.cloud().tag(i).is_boundary())).collect(),
        });
    }
    out
}
