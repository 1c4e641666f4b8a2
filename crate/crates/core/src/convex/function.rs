use std::collections::HashMap;

use rayon::prelude::*;

use super::cloud::{Point, PointCloud};
use crate::hull;
use crate::linalg;
use crate::{Error, Result};

/// Relative tolerance for deciding that a node lies on the envelope.
pub const HULL_TOL: f64 = 1e-10;

/// One simplex of the lower convex envelope with its affine piece
/// `u(x) = ⟨gradient, x⟩ + offset`.
#[derive(Debug, Clone)]
pub struct Facet {
    pub nodes: Vec<usize>,
    pub gradient: Point,
    pub offset: f64,
    /// Lebesgue volume of the simplex.
    pub volume: f64,
}

impl Facet {
    pub fn eval(&self, x: &Point) -> f64 {
        self.gradient[0] * x[0] + self.gradient[1] * x[1] + self.gradient[2] * x[2] + self.offset
    }
}

/// Piecewise-linear convex function: the lower convex envelope of node data.
#[derive(Debug, Clone)]
pub struct PLConvexFunction {
    cloud: PointCloud,
    values: Vec<f64>,
    envelope: Vec<f64>,
    active: Vec<bool>,
    incidence: Vec<Vec<usize>>,
    /// For envelope nodes that are not simplex vertices: a facet containing them.
    host: Vec<Option<usize>>,
    facets: Vec<Facet>,
    locator: FacetLocator,
}

/// Convexifies node data: lifts `(x_i, values_i)`, keeps the lower hull.
pub fn lower_convex_envelope(cloud: &PointCloud, values: &[f64]) -> Result<PLConvexFunction> {
    if values.len() != cloud.len() {
        return Err(Error::Config(format!(
            "{} values for {} nodes",
            values.len(),
            cloud.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("non-finite node value".into()));
    }
    let dim = cloud.dim();
    let nodes = cloud.nodes();
    let simplices = hull::lower_envelope_simplices(dim, nodes, values)?;

    let facets: Vec<Facet> = simplices
        .into_iter()
        .filter_map(|ids| affine_piece(dim, nodes, values, ids))
        .collect();
    if facets.is_empty() {
        return Err(Error::Degenerate("no non-degenerate envelope facets".into()));
    }

    let n = cloud.len();
    let mut incidence = vec![Vec::new(); n];
    for (f, facet) in facets.iter().enumerate() {
        for &v in &facet.nodes {
            incidence[v].push(f);
        }
    }
    let locator = FacetLocator::new(dim, nodes, &facets);

    let located: Vec<(f64, Option<usize>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            if !incidence[i].is_empty() {
                (values[i], None)
            } else {
                match locator.locate(nodes, &facets, &nodes[i]) {
                    Some(f) => (facets[f].eval(&nodes[i]), Some(f)),
                    None => (values[i], None),
                }
            }
        })
        .collect();
    let envelope: Vec<f64> = located.iter().map(|(e, _)| *e).collect();
    let host: Vec<Option<usize>> = located.iter().map(|(_, h)| *h).collect();
    let active: Vec<bool> = (0..n)
        .map(|i| !incidence[i].is_empty() || values[i] - envelope[i] <= HULL_TOL * (1.0 + values[i].abs()))
        .collect();

    Ok(PLConvexFunction {
        cloud: cloud.clone(),
        values: values.to_vec(),
        envelope,
        active,
        incidence,
        host,
        facets,
        locator,
    })
}

fn affine_piece(dim: usize, nodes: &[Point], values: &[f64], ids: Vec<usize>) -> Option<Facet> {
    let p0 = nodes[ids[0]];
    let u0 = values[ids[0]];
    let volume = hull::simplex_volume(dim, &ids.iter().map(|&i| nodes[i]).collect::<Vec<_>>());
    let gradient = if dim == 2 {
        let a = [nodes[ids[1]][0] - p0[0], nodes[ids[1]][1] - p0[1]];
        let b = [nodes[ids[2]][0] - p0[0], nodes[ids[2]][1] - p0[1]];
        let (da, db) = (values[ids[1]] - u0, values[ids[2]] - u0);
        let det = a[0] * b[1] - a[1] * b[0];
        if det == 0.0 {
            return None;
        }
        [(da * b[1] - db * a[1]) / det, (a[0] * db - b[0] * da) / det, 0.0]
    } else {
        let mut rows = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for k in 0..3 {
            let p = nodes[ids[k + 1]];
            rows[k] = [p[0] - p0[0], p[1] - p0[1], p[2] - p0[2]];
            rhs[k] = values[ids[k + 1]] - u0;
        }
        linalg::solve3(rows, rhs)?
    };
    let offset = u0 - (gradient[0] * p0[0] + gradient[1] * p0[1] + gradient[2] * p0[2]);
    Some(Facet {
        nodes: ids,
        gradient,
        offset,
        volume,
    })
}

impl PLConvexFunction {
    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn dim(&self) -> usize {
        self.cloud.dim()
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    /// The input node values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The envelope evaluated at the nodes.
    pub fn envelope_values(&self) -> &[f64] {
        &self.envelope
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    /// True when node `i` is a vertex of at least one envelope simplex.
    pub fn is_vertex(&self, i: usize) -> bool {
        !self.incidence[i].is_empty()
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn incident_facets(&self, i: usize) -> &[usize] {
        &self.incidence[i]
    }

    /// Gradients of the facets meeting at node `i` (the vertices of its
    /// subgradient cell). For an envelope node inside a facet this is the
    /// facet's single gradient.
    pub fn node_gradients(&self, i: usize) -> Vec<Point> {
        if self.incidence[i].is_empty() {
            return self.host[i].map(|f| vec![self.facets[f].gradient]).unwrap_or_default();
        }
        self.incidence[i].iter().map(|&f| self.facets[f].gradient).collect()
    }

    /// Mean of the incident facet gradients, an element of the subdifferential.
    pub fn mean_subgradient(&self, i: usize) -> Option<Point> {
        let g = self.node_gradients(i);
        if g.is_empty() {
            return None;
        }
        let mut m = [0.0; 3];
        for p in &g {
            for d in 0..3 {
                m[d] += p[d] / g.len() as f64;
            }
        }
        Some(m)
    }

    /// Envelope neighbours: nodes sharing a simplex with `i`.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.incidence[i]
            .iter()
            .flat_map(|&f| self.facets[f].nodes.iter().copied())
            .filter(|&j| j != i)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Barycentric dual volumes: each simplex gives `1/(dim+1)` of its volume to
    /// each of its vertices. They sum to the volume of the hull of the cloud.
    pub fn node_volumes(&self) -> Vec<f64> {
        let mut vol = vec![0.0; self.len()];
        let share = 1.0 / (self.dim() + 1) as f64;
        for f in &self.facets {
            for &v in &f.nodes {
                vol[v] += f.volume * share;
            }
        }
        vol
    }

    /// Envelope value at an arbitrary point of the hull of the cloud.
    pub fn value_at(&self, x: &Point) -> Result<f64> {
        match self.locator.locate(self.cloud.nodes(), &self.facets, x) {
            Some(f) => Ok(self.facets[f].eval(x)),
            None => Err(Error::Range(format!("point {x:?} outside the sampled range"))),
        }
    }

    /// Facet containing `x`, if any.
    pub fn locate(&self, x: &Point) -> Option<usize> {
        self.locator.locate(self.cloud.nodes(), &self.facets, x)
    }

    /// `max_i ⟨p, x_i⟩ − u(x_i)` over active nodes: the conjugate of the
    /// max-affine extension of the node data.
    pub fn conjugate_at(&self, p: &Point) -> f64 {
        let nodes = self.cloud.nodes();
        (0..self.len())
            .filter(|&i| self.active[i])
            .map(|i| p[0] * nodes[i][0] + p[1] * nodes[i][1] + p[2] * nodes[i][2] - self.envelope[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pairs of facets sharing a codimension-one face.
    pub fn adjacent_facets(&self) -> Vec<(usize, usize)> {
        let dim = self.dim();
        let mut faces: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut out = Vec::new();
        for (f, facet) in self.facets.iter().enumerate() {
            for skip in 0..=dim {
                let mut key: Vec<usize> = facet
                    .nodes
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, v)| *v)
                    .collect();
                key.sort_unstable();
                if let Some(g) = faces.insert(key, f) {
                    out.push((g, f));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Checks gradient monotonicity across every adjacent facet pair:
    /// `⟨g_i − g_j, c_i − c_j⟩ ≥ 0` for facet centroids `c`.
    pub fn check_integrity(&self) -> Result<()> {
        let nodes = self.cloud.nodes();
        let centroid = |f: &Facet| {
            let mut c = [0.0; 3];
            for &v in &f.nodes {
                for d in 0..3 {
                    c[d] += nodes[v][d] / f.nodes.len() as f64;
                }
            }
            c
        };
        for (a, b) in self.adjacent_facets() {
            let (fa, fb) = (&self.facets[a], &self.facets[b]);
            let (ca, cb) = (centroid(fa), centroid(fb));
            let s: f64 = (0..3).map(|d| (fa.gradient[d] - fb.gradient[d]) * (ca[d] - cb[d])).sum();
            let scale: f64 = (0..3)
                .map(|d| fa.gradient[d].abs().max(fb.gradient[d].abs()) * (ca[d] - cb[d]).abs())
                .sum::<f64>();
            let reach: f64 = (0..3).map(|d| (ca[d] - cb[d]).abs()).sum();
            if s < -1e-8 * scale - 1e-13 * reach {
                return Err(Error::Integrity(format!(
                    "facets {a} and {b} violate gradient monotonicity ({s:e})"
                )));
            }
        }
        Ok(())
    }
}

/// Uniform-grid bucket index over facet bounding boxes for point location.
#[derive(Debug, Clone)]
struct FacetLocator {
    dim: usize,
    lo: [f64; 3],
    cell: f64,
    counts: [usize; 3],
    buckets: Vec<Vec<u32>>,
}

impl FacetLocator {
    fn new(dim: usize, nodes: &[Point], facets: &[Facet]) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in nodes {
            for d in 0..dim {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        for d in dim..3 {
            lo[d] = 0.0;
            hi[d] = 0.0;
        }
        let extent = (0..dim).map(|d| hi[d] - lo[d]).fold(0.0, f64::max).max(1e-300);
        let target = (facets.len() as f64).max(1.0);
        let mut cell = extent / target.powf(1.0 / dim as f64).max(1.0);
        if cell <= 0.0 {
            cell = 1.0;
        }
        let mut counts = [1usize; 3];
        for d in 0..dim {
            counts[d] = (((hi[d] - lo[d]) / cell).floor() as usize + 1).min(4096);
        }
        let total = counts[0] * counts[1] * counts[2];
        let mut buckets = vec![Vec::new(); total];
        let idx = |c: [usize; 3]| (c[2] * counts[1] + c[1]) * counts[0] + c[0];
        for (f, facet) in facets.iter().enumerate() {
            let mut flo = [usize::MAX; 3];
            let mut fhi = [0usize; 3];
            for d in 0..3 {
                flo[d] = 0;
                fhi[d] = 0;
            }
            for d in 0..dim {
                let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
                for &v in &facet.nodes {
                    a = a.min(nodes[v][d]);
                    b = b.max(nodes[v][d]);
                }
                flo[d] = (((a - lo[d]) / cell).floor().max(0.0) as usize).min(counts[d] - 1);
                fhi[d] = (((b - lo[d]) / cell).floor().max(0.0) as usize).min(counts[d] - 1);
            }
            for z in flo[2]..=fhi[2] {
                for y in flo[1]..=fhi[1] {
                    for x in flo[0]..=fhi[0] {
                        buckets[idx([x, y, z])].push(f as u32);
                    }
                }
            }
        }
        FacetLocator {
            dim,
            lo,
            cell,
            counts,
            buckets,
        }
    }

    fn locate(&self, nodes: &[Point], facets: &[Facet], x: &Point) -> Option<usize> {
        let mut c = [0usize; 3];
        for d in 0..self.dim {
            let t = ((x[d] - self.lo[d]) / self.cell).floor();
            if t < -1.0 || t > self.counts[d] as f64 {
                return None;
            }
            c[d] = (t.max(0.0) as usize).min(self.counts[d] - 1);
        }
        let b = &self.buckets[(c[2] * self.counts[1] + c[1]) * self.counts[0] + c[0]];
        let mut best: Option<(usize, f64)> = None;
        for &f in b {
            let m = barycentric_min(self.dim, nodes, &facets[f as usize].nodes, x);
            if best.is_none_or(|(_, bm)| m > bm) {
                best = Some((f as usize, m));
            }
        }
        match best {
            Some((f, m)) if m >= -1e-9 => Some(f),
            _ => None,
        }
    }
}

/// Smallest barycentric coordinate of `x` in the simplex.
fn barycentric_min(dim: usize, nodes: &[Point], ids: &[usize], x: &Point) -> f64 {
    let p0 = nodes[ids[0]];
    if dim == 2 {
        let a = [nodes[ids[1]][0] - p0[0], nodes[ids[1]][1] - p0[1]];
        let b = [nodes[ids[2]][0] - p0[0], nodes[ids[2]][1] - p0[1]];
        let r = [x[0] - p0[0], x[1] - p0[1]];
        let det = a[0] * b[1] - a[1] * b[0];
        let l1 = (r[0] * b[1] - r[1] * b[0]) / det;
        let l2 = (a[0] * r[1] - a[1] * r[0]) / det;
        l1.min(l2).min(1.0 - l1 - l2)
    } else {
        let mut rows = [[0.0; 3]; 3];
        for k in 0..3 {
            for d in 0..3 {
                rows[d][k] = nodes[ids[k + 1]][d] - p0[d];
            }
        }
        match linalg::solve3(rows, [x[0] - p0[0], x[1] - p0[1], x[2] - p0[2]]) {
            Some(l) => l[0].min(l[1]).min(l[2]).min(1.0 - l[0] - l[1] - l[2]),
            None => f64::NEG_INFINITY,
        }
    }
}
