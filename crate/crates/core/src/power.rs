//! Power (Laguerre) diagrams of weighted planar sites clipped to a convex polygon.

use rayon::prelude::*;
use serde::Serialize;

use crate::geom::{self, LabeledPolygon, P2};
use crate::hull;
use crate::{Error, Result};

/// Below this many sites cells are built against every other site.
const BRUTE_FORCE_MAX: usize = 64;

/// Shared boundary between the cells of sites `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerEdge {
    pub i: usize,
    pub j: usize,
    pub a: P2,
    pub b: P2,
    pub len: f64,
}

#[derive(Debug, Clone)]
pub struct PowerDiagram {
    pub source: Vec<P2>,
    pub sites: Vec<P2>,
    pub weights: Vec<f64>,
    /// Cell of each site, edges labelled by the neighbouring site (or
    /// [`geom::DOMAIN_EDGE`]).
    pub cells: Vec<LabeledPolygon>,
    pub areas: Vec<f64>,
    pub edges: Vec<PowerEdge>,
}

/// Cells `{x : |x − p_i|² − ψ_i ≤ |x − p_j|² − ψ_j ∀j} ∩ source`.
pub fn power_diagram(sites: &[P2], weights: &[f64], source: &[P2]) -> Result<PowerDiagram> {
    if sites.len() != weights.len() {
        return Err(Error::Config("one weight per site required".into()));
    }
    if sites.is_empty() {
        return Err(Error::Config("no sites".into()));
    }
    if source.len() < 3 || geom::signed_area(source) <= 0.0 {
        return Err(Error::Geometry("source must be a counter-clockwise convex polygon".into()));
    }
    check_distinct(sites)?;
    let candidates = neighbour_candidates(sites, weights);
    let cells: Vec<LabeledPolygon> = (0..sites.len())
        .into_par_iter()
        .map(|i| {
            let mut cell = LabeledPolygon::from_domain(source);
            let others: Box<dyn Iterator<Item = usize>> = match &candidates {
                // sites missing from the regular triangulation have empty cells
                Some(c) if c[i].is_empty() => return LabeledPolygon::default(),
                Some(c) => Box::new(c[i].iter().copied()),
                None => Box::new((0..sites.len()).filter(move |&j| j != i)),
            };
            for j in others {
                let (n, b) = bisector(sites[i], weights[i], sites[j], weights[j]);
                cell.clip(n, b, j as i64);
                if cell.is_empty() {
                    break;
                }
            }
            cell
        })
        .collect();
    let areas: Vec<f64> = cells.iter().map(|c| c.area()).collect();
    let edges = collect_edges(&cells);
    Ok(PowerDiagram {
        source: source.to_vec(),
        sites: sites.to_vec(),
        weights: weights.to_vec(),
        cells,
        areas,
        edges,
    })
}

/// Half-plane `⟨n, x⟩ ≤ b` where site `i` beats site `j`.
fn bisector(pi: P2, wi: f64, pj: P2, wj: f64) -> (P2, f64) {
    let n = geom::sub(pj, pi);
    let b = 0.5 * (geom::dot(pj, pj) - wj - geom::dot(pi, pi) + wi);
    (n, b)
}

fn check_distinct(sites: &[P2]) -> Result<()> {
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by(|&a, &b| sites[a][0].total_cmp(&sites[b][0]).then(sites[a][1].total_cmp(&sites[b][1])));
    for w in order.windows(2) {
        if sites[w[0]] == sites[w[1]] {
            return Err(Error::Config(format!("duplicate sites {} and {}", w[0], w[1])));
        }
    }
    Ok(())
}

/// Neighbours in the regular triangulation (lower hull of the lifted sites
/// `(p, |p|² − ψ)`), or `None` to fall back to all pairs.
fn neighbour_candidates(sites: &[P2], weights: &[f64]) -> Option<Vec<Vec<usize>>> {
    if sites.len() <= BRUTE_FORCE_MAX {
        return None;
    }
    let pts: Vec<[f64; 3]> = sites.iter().map(|p| [p[0], p[1], 0.0]).collect();
    let lift: Vec<f64> = sites
        .iter()
        .zip(weights)
        .map(|(p, w)| geom::dot(*p, *p) - w)
        .collect();
    let simplices = hull::lower_envelope_simplices(2, &pts, &lift).ok()?;
    let mut nb = vec![Vec::new(); sites.len()];
    for t in simplices {
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    nb[t[a]].push(t[b]);
                }
            }
        }
    }
    for l in nb.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    Some(nb)
}

fn collect_edges(cells: &[LabeledPolygon]) -> Vec<PowerEdge> {
    let mut map: std::collections::BTreeMap<(usize, usize), PowerEdge> = Default::default();
    for (i, c) in cells.iter().enumerate() {
        let m = c.verts.len();
        if m < 3 {
            continue;
        }
        for e in 0..m {
            let l = c.labels[e];
            if l < 0 {
                continue;
            }
            let j = l as usize;
            let (a, b) = (c.verts[e], c.verts[(e + 1) % m]);
            let len = geom::dist(a, b);
            if len == 0.0 {
                continue;
            }
            let key = (i.min(j), i.max(j));
            // prefer the copy from the lower-index cell
            if i < j || !map.contains_key(&key) {
                map.insert(
                    key,
                    PowerEdge {
                        i: key.0,
                        j: key.1,
                        a,
                        b,
                        len,
                    },
                );
            }
        }
    }
    map.into_values().collect()
}

impl PowerDiagram {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// `|Σ areas − |source|| / |source|`.
    pub fn tiling_defect(&self) -> f64 {
        let total = geom::area(&self.source);
        (self.areas.iter().sum::<f64>() - total).abs() / total
    }

    /// Index of the cell containing `x` (smallest power distance).
    pub fn locate(&self, x: P2) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, (p, w)) in self.sites.iter().zip(&self.weights).enumerate() {
            let d = geom::dot(geom::sub(x, *p), geom::sub(x, *p)) - w;
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sites_split_the_square() {
        let d = power_diagram(&[[-0.5, 0.0], [0.5, 0.0]], &[0.0, 0.0], &geom::square(-1.0, 1.0)).unwrap();
        assert!((d.areas[0] - 2.0).abs() < 1e-14 && (d.areas[1] - 2.0).abs() < 1e-14);
        assert_eq!(d.edges.len(), 1);
        assert!((d.edges[0].len - 2.0).abs() < 1e-14);
    }

    #[test]
    fn raising_a_weight_grows_the_cell() {
        let sites = [[-0.3, 0.1], [0.4, 0.2], [0.0, -0.5], [0.1, 0.6]];
        let mut w = vec![0.0; 4];
        let a0 = power_diagram(&sites, &w, &geom::square(-1.0, 1.0)).unwrap().areas[1];
        w[1] = 0.1;
        let a1 = power_diagram(&sites, &w, &geom::square(-1.0, 1.0)).unwrap().areas[1];
        assert!(a1 > a0);
    }

    #[test]
    fn duplicate_sites_rejected() {
        assert!(power_diagram(&[[0.0, 0.0], [0.0, 0.0]], &[0.0, 0.0], &geom::square(-1.0, 1.0)).is_err());
    }

    #[test]
    fn triangulation_route_matches_brute_force() {
        // a jittered grid of 100 sites with mixed weights
        let mut sites = Vec::new();
        let mut w = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                let t = (i * 10 + j) as f64;
                sites.push([-0.9 + 0.2 * i as f64 + 0.03 * (t * 1.7).sin(), -0.9 + 0.2 * j as f64 + 0.03 * (t * 2.3).cos()]);
                w.push(0.01 * (t * 0.37).sin());
            }
        }
        let sq = geom::square(-1.0, 1.0);
        let fast = power_diagram(&sites, &w, &sq).unwrap();
        assert!(fast.tiling_defect() < 1e-12);
        for i in 0..sites.len() {
            let mut cell = LabeledPolygon::from_domain(&sq);
            for j in 0..sites.len() {
                if j != i {
                    let (n, b) = bisector(sites[i], w[i], sites[j], w[j]);
                    cell.clip(n, b, j as i64);
                }
            }
            assert!((cell.area() - fast.areas[i]).abs() < 1e-12);
        }
    }
}
