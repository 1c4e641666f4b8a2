use serde::{Deserialize, Serialize};

use crate::geom::{self, P2};
use crate::{Error, Result};

/// Point coordinates; the third component is unused (zero) in two dimensions.
pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeTag {
    Interior,
    Boundary,
    ObstacleSupport,
}

impl NodeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeTag::Interior => "interior",
            NodeTag::Boundary => "boundary",
            NodeTag::ObstacleSupport => "obstacle",
        }
    }

    pub fn is_boundary(self) -> bool {
        self == NodeTag::Boundary
    }
}

/// Declared domain whose boundary carries the `Boundary` nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Ball { center: Point, radius: f64 },
    Box { lo: Point, hi: Point },
    /// Convex polygon (2-D only), counter-clockwise.
    Polygon(Vec<P2>),
}

impl Domain {
    fn boundary_distance(&self, dim: usize, p: &Point) -> f64 {
        match self {
            Domain::Ball { center, radius } => {
                let r = (0..dim).map(|d| (p[d] - center[d]).powi(2)).sum::<f64>().sqrt();
                (r - radius).abs()
            }
            Domain::Box { lo, hi } => (0..dim)
                .map(|d| (p[d] - lo[d]).abs().min((p[d] - hi[d]).abs()))
                .fold(f64::INFINITY, f64::min),
            Domain::Polygon(poly) => geom::dist_to_boundary(poly, [p[0], p[1]]),
        }
    }

    fn scale(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => radius.abs().max(1.0),
            Domain::Box { lo, hi } => (0..3).map(|d| (hi[d] - lo[d]).abs()).fold(1.0, f64::max),
            Domain::Polygon(poly) => poly.iter().map(|p| geom::norm(*p)).fold(1.0, f64::max),
        }
    }
}

/// Nodes of a discretised domain in two or three dimensions.
#[derive(Debug, Clone)]
pub struct PointCloud {
    dim: usize,
    nodes: Vec<Point>,
    tags: Vec<NodeTag>,
    domain: Option<Domain>,
}

impl PointCloud {
    /// Validates and builds a cloud: nodes pairwise distinct, spanning `dim`.
    pub fn new(dim: usize, nodes: Vec<Point>, tags: Vec<NodeTag>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Config(format!("dimension must be 2 or 3, got {dim}")));
        }
        if nodes.len() != tags.len() {
            return Err(Error::Config("one tag per node required".into()));
        }
        let mut nodes = nodes;
        for p in nodes.iter_mut() {
            if p.iter().take(dim).any(|v| !v.is_finite()) {
                return Err(Error::Config("non-finite node coordinate".into()));
            }
            if dim == 2 {
                p[2] = 0.0;
            }
        }
        check_distinct(&nodes)?;
        check_spanning(dim, &nodes)?;
        Ok(PointCloud {
            dim,
            nodes,
            tags,
            domain: None,
        })
    }

    /// Attaches a domain and checks that boundary-tagged nodes lie on it.
    pub fn with_domain(mut self, domain: Domain) -> Result<Self> {
        let tol = 1e-9 * domain.scale();
        for (i, (p, t)) in self.nodes.iter().zip(&self.tags).enumerate() {
            if t.is_boundary() && domain.boundary_distance(self.dim, p) > tol {
                return Err(Error::Config(format!(
                    "boundary node {i} is off the declared domain boundary"
                )));
            }
        }
        self.domain = Some(domain);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn tags(&self) -> &[NodeTag] {
        &self.tags
    }

    pub fn tag(&self, i: usize) -> NodeTag {
        self.tags[i]
    }

    pub fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }
}

fn check_distinct(nodes: &[Point]) -> Result<()> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (nodes[a], nodes[b]);
        p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])).then(p[2].total_cmp(&q[2]))
    });
    for w in order.windows(2) {
        if nodes[w[0]] == nodes[w[1]] {
            return Err(Error::Config(format!("duplicate nodes {} and {}", w[0], w[1])));
        }
    }
    Ok(())
}

fn check_spanning(dim: usize, nodes: &[Point]) -> Result<()> {
    if nodes.len() < dim + 1 {
        return Err(Error::Degenerate(format!("need at least {} nodes", dim + 1)));
    }
    let sub = |a: Point, b: Point| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let dot = |a: Point, b: Point| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let crs = |a: Point, b: Point| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let p0 = nodes[0];
    let (i1, d1) = nodes
        .iter()
        .enumerate()
        .map(|(i, p)| (i, dot(sub(*p, p0), sub(*p, p0)).sqrt()))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    if d1 == 0.0 {
        return Err(Error::Degenerate("all nodes coincide".into()));
    }
    let e1 = sub(nodes[i1], p0);
    let (i2, a2) = nodes
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let c = crs(e1, sub(*p, p0));
            (i, dot(c, c).sqrt())
        })
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    if a2 <= 1e-10 * d1 * d1 {
        return Err(Error::Degenerate("nodes are collinear".into()));
    }
    if dim == 3 {
        let nrm = crs(e1, sub(nodes[i2], p0));
        let v3 = nodes
            .iter()
            .map(|p| dot(nrm, sub(*p, p0)).abs())
            .fold(0.0, f64::max);
        if v3 <= 1e-10 * a2 * d1 {
            return Err(Error::Degenerate("nodes are coplanar".into()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_collinear() {
        let t = vec![NodeTag::Interior; 3];
        assert!(matches!(
            PointCloud::new(2, vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]], t.clone()),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            PointCloud::new(2, vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]], t),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn rejects_coplanar_3d() {
        let nodes = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        let r = PointCloud::new(3, nodes, vec![NodeTag::Interior; 4]);
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn boundary_nodes_must_sit_on_domain() {
        let nodes = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.5, 0.0]];
        let tags = vec![NodeTag::Boundary, NodeTag::Boundary, NodeTag::Boundary, NodeTag::Boundary];
        let c = PointCloud::new(2, nodes, tags).unwrap();
        let d = Domain::Ball {
            center: [0.0; 3],
            radius: 1.0,
        };
        assert!(c.with_domain(d).is_err());
    }
}
