use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::barriers::{dist_to_span, w_profile, TailProfile};
use crate::convex::{lower_convex_envelope, Domain, NodeTag, Point, PointCloud};
use crate::geom::{self, P2};
use crate::power::power_diagram;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Obstacle on `{x = 0, |y| ≤ ε}`.
    Segment,
    /// Obstacle on the `(n−k)`-skeleton of a convex polytope inside `B_ε`.
    PolytopeSkeleton,
    /// Obstacle on a union of segments through the origin.
    Cross,
    /// Obstacle `|x|²/2` on a sphere.
    SmoothBoundary,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Segment => "segment",
            ScenarioKind::PolytopeSkeleton => "polytope_skeleton",
            ScenarioKind::Cross => "cross",
            ScenarioKind::SmoothBoundary => "smooth_boundary",
        }
    }
}

/// Parameters of one obstacle scenario. All lengths are in the rescaled
/// frame where the obstacle support lies in `B_ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub alpha: f64,
    pub rho: f64,
    /// Radius of the computational ball `B_R`.
    pub radius: f64,
    /// Coarse lattice spacing, also the boundary vertex spacing.
    pub h0: f64,
    /// Lattice spacing near the obstacle support.
    pub h_min: f64,
    /// Width of the refined band around the support, in units of `ε`.
    pub tube: f64,
    /// Polytope vertices (2-D: counter-clockwise polygon; 3-D: any order).
    /// Empty selects the default centred square/cube.
    pub vertices: Vec<Vec<f64>>,
    /// Cross segment directions; each segment is `{t d : |t| ≤ len/2}`.
    pub directions: Vec<Vec<f64>>,
    /// Total length of every cross segment; `0` means `2ε`.
    pub segment_length: f64,
    /// Radius of the sphere carrying the smooth-boundary obstacle.
    pub sphere_radius: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            kind: ScenarioKind::Segment,
            n: 2,
            k: 1,
            eps: 0.2,
            alpha: 0.5,
            rho: 0.5,
            radius: 2.0,
            h0: 0.05,
            h_min: 0.01,
            tube: 2.0,
            vertices: Vec::new(),
            directions: Vec::new(),
            segment_length: 0.0,
            sphere_radius: 0.5,
        }
    }
}

impl ScenarioSpec {
    /// Defaults for each scenario kind.
    pub fn preset(kind: ScenarioKind, n: usize) -> Self {
        let base = ScenarioSpec {
            kind,
            n,
            ..Default::default()
        };
        match kind {
            ScenarioKind::Segment => base,
            ScenarioKind::PolytopeSkeleton => ScenarioSpec { alpha: 0.9, ..base },
            ScenarioKind::Cross => ScenarioSpec {
                k: n,
                directions: (0..n)
                    .map(|d| {
                        let mut e = vec![0.0; n];
                        e[d] = 1.0;
                        e
                    })
                    .collect(),
                ..base
            },
            ScenarioKind::SmoothBoundary => ScenarioSpec {
                k: n - 1,
                eps: 0.05,
                h_min: 0.02,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 2 && self.n != 3 {
            return Err(Error::Config(format!("scenarios are solved for n = 2, 3; got {}", self.n)));
        }
        let positive = [
            ("eps", self.eps),
            ("radius", self.radius),
            ("h0", self.h0),
            ("h_min", self.h_min),
            ("tube", self.tube),
            ("rho", self.rho),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.h_min > self.h0 {
            return Err(Error::Config(format!(
                "infeasible grading: h_min = {} exceeds h0 = {}",
                self.h_min, self.h0
            )));
        }
        TailProfile::new(self.alpha)?;
        let reach = match self.kind {
            ScenarioKind::SmoothBoundary => self.sphere_radius,
            _ => self.eps,
        } + self.tube * self.eps;
        if reach >= self.radius - self.h0 {
            return Err(Error::Config(format!(
                "refined region (reach {reach}) does not fit inside B_R with R = {}",
                self.radius
            )));
        }
        match self.kind {
            ScenarioKind::Segment => {
                if self.k < 1 || self.k >= self.n {
                    return Err(Error::Constraint(format!(
                        "segment scenario needs 1 <= k <= n-1, got k = {}",
                        self.k
                    )));
                }
            }
            ScenarioKind::PolytopeSkeleton => {
                if self.k != 1 && self.k != 2 {
                    return Err(Error::Constraint(format!(
                        "polytope skeleton is supported for k = 1 or 2, got k = {}",
                        self.k
                    )));
                }
                if self.k >= self.n {
                    return Err(Error::Constraint(format!("need k < n, got k = {}, n = {}", self.k, self.n)));
                }
                for v in self.polytope_vertices() {
                    if v.len() != self.n {
                        return Err(Error::Config("polytope vertex has the wrong dimension".into()));
                    }
                    let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                    if r < self.eps * (1.0 - 1e-12) {
                        return Err(Error::Constraint(format!(
                            "polytope vertex {v:?} at distance {r} is inside B_eps; vertices lie on or outside the sphere of radius eps"
                        )));
                    }
                }
            }
            ScenarioKind::Cross => {
                if self.directions.is_empty() {
                    return Err(Error::Config("cross scenario needs at least one direction".into()));
                }
                if self.directions.iter().any(|d| d.len() != self.n || d.iter().all(|v| *v == 0.0)) {
                    return Err(Error::Config("cross directions must be nonzero n-vectors".into()));
                }
                if self.half_length() > self.eps * (1.0 + 1e-12) {
                    return Err(Error::Constraint("cross segments must lie inside B_eps".into()));
                }
            }
            ScenarioKind::SmoothBoundary => {
                if !(self.sphere_radius > 0.0) {
                    return Err(Error::Config("sphere_radius must be positive".into()));
                }
            }
        }
        Ok(())
    }

    fn half_length(&self) -> f64 {
        if self.segment_length > 0.0 {
            0.5 * self.segment_length
        } else {
            self.eps
        }
    }

    /// Polytope vertices, defaulting to a centred square/cube of half-side
    /// `0.75ε` (vertices at distance `0.75√n·ε`).
    pub fn polytope_vertices(&self) -> Vec<Vec<f64>> {
        if !self.vertices.is_empty() {
            return self.vertices.clone();
        }
        let d = 0.75 * self.eps;
        if self.n == 2 {
            vec![vec![d, -d], vec![d, d], vec![-d, d], vec![-d, -d]]
        } else {
            let mut out = Vec::new();
            for m in 0..8 {
                out.push((0..3).map(|b| if m >> b & 1 == 1 { d } else { -d }).collect());
            }
            out
        }
    }
}

/// One connected piece of the obstacle support.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    /// Straight segment; the profile coordinate is the signed distance from
    /// its midpoint.
    Segment { a: Point, b: Point },
    /// Circle in the `xy`-plane; the profile coordinate is arclength from `+x`.
    Loop { center: Point, radius: f64 },
    /// Flat disk orthogonal to coordinate axis `axis`; profile coordinates are
    /// the two remaining coordinates relative to the centre.
    Disk { center: Point, radius: f64, axis: usize },
}

impl Piece {
    pub fn dim(&self) -> usize {
        match self {
            Piece::Disk { .. } => 2,
            _ => 1,
        }
    }

    /// Profile coordinates of a point on the piece.
    pub fn coords(&self, p: &Point) -> Vec<f64> {
        match self {
            Piece::Segment { a, b } => {
                let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0];
                let d = sub3(b, a);
                let len = norm3(&d);
                vec![dot3(&sub3(p, &mid), &d) / len]
            }
            Piece::Loop { center, radius } => {
                let mut t = (p[1] - center[1]).atan2(p[0] - center[0]);
                if t < 0.0 {
                    t += 2.0 * PI;
                }
                vec![radius * t]
            }
            Piece::Disk { center, axis, .. } => (0..3).filter(|d| d != axis).map(|d| p[d] - center[d]).collect(),
        }
    }

    pub fn distance(&self, p: &Point) -> f64 {
        match self {
            Piece::Segment { a, b } => {
                let d = sub3(b, a);
                let t = (dot3(&sub3(p, a), &d) / dot3(&d, &d)).clamp(0.0, 1.0);
                norm3(&sub3(p, &[a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]]))
            }
            Piece::Loop { center, radius } => {
                let planar = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
                ((planar - radius).powi(2) + (p[2] - center[2]).powi(2)).sqrt()
            }
            Piece::Disk { center, radius, axis } => {
                let normal = p[*axis] - center[*axis];
                let planar = (0..3)
                    .filter(|d| d != axis)
                    .map(|d| (p[d] - center[d]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                (normal.powi(2) + (planar - radius).max(0.0).powi(2)).sqrt()
            }
        }
    }

    /// Points on the piece with spacing at most `h`, symmetric about its centre.
    fn sample(&self, dim: usize, h: f64) -> Vec<Point> {
        match self {
            Piece::Segment { a, b } => {
                let len = norm3(&sub3(b, a));
                let c = (len / h - 1e-9).ceil().max(1.0) as usize;
                (0..=c)
                    .map(|j| {
                        let t = j as f64 / c as f64;
                        [
                            a[0] + t * (b[0] - a[0]),
                            a[1] + t * (b[1] - a[1]),
                            a[2] + t * (b[2] - a[2]),
                        ]
                    })
                    .collect()
            }
            Piece::Loop { center, radius } => {
                let m = 4 * ((2.0 * PI * radius / (4.0 * h)).ceil() as usize).max(1);
                (0..m)
                    .map(|j| {
                        let t = 2.0 * PI * j as f64 / m as f64;
                        [center[0] + radius * t.cos(), center[1] + radius * t.sin(), 0.0]
                    })
                    .collect()
            }
            Piece::Disk { center, radius, axis } => {
                let _ = dim;
                let m = (radius / h + 1e-9).floor() as i64;
                let (u, v) = match axis {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let mut out = Vec::new();
                for i in -m..=m {
                    for j in -m..=m {
                        let (s, t) = (i as f64 * h, j as f64 * h);
                        if (s * s + t * t).sqrt() <= radius + 1e-12 {
                            let mut p = *center;
                            p[u] += s;
                            p[v] += t;
                            out.push(p);
                        }
                    }
                }
                out
            }
        }
    }
}

fn sub3(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &Point) -> f64 {
    dot3(a, a).sqrt()
}

/// Obstacle support: pieces, their nodes and each node's piece coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct Support {
    pub pieces: Vec<Piece>,
    /// Node indices (into the cloud) of the support nodes.
    pub nodes: Vec<usize>,
    /// For each support node, the pieces it lies on.
    pub membership: Vec<Vec<usize>>,
}

/// Discrete obstacle problem: find the largest node function with atoms at
/// least `mu` at interior nodes, equal to the boundary data on the boundary
/// and below the obstacle.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub spec: Option<ScenarioSpec>,
    pub cloud: PointCloud,
    pub mu: Vec<f64>,
    /// Prescribed values at boundary nodes (`NaN` elsewhere).
    pub boundary_values: Vec<f64>,
    /// Obstacle values; `+∞` off the support.
    pub obstacle: Vec<f64>,
    pub initial: Vec<f64>,
    pub support: Support,
    /// Local lattice spacing at each node.
    pub spacing: Vec<f64>,
    /// Radius `ε` of the lower barrier `W_n − W_n(ε e)`.
    pub barrier_eps: f64,
}

impl DiscreteProblem {
    /// Problem from explicit data; the initial function must be a subsolution.
    pub fn new(
        cloud: PointCloud,
        mu: Vec<f64>,
        boundary_values: Vec<f64>,
        obstacle: Vec<f64>,
        initial: Vec<f64>,
    ) -> Result<Self> {
        let n = cloud.len();
        if mu.len() != n || boundary_values.len() != n || obstacle.len() != n || initial.len() != n {
            return Err(Error::Config("problem arrays must have one entry per node".into()));
        }
        for i in 0..n {
            if cloud.tag(i).is_boundary() {
                if !boundary_values[i].is_finite() {
                    return Err(Error::Config(format!("boundary node {i} has no boundary value")));
                }
            } else if !(mu[i] > 0.0) {
                return Err(Error::Config(format!("interior node {i} has non-positive mass")));
            }
            if initial[i] > obstacle[i] {
                return Err(Error::Config(format!("initial value above the obstacle at node {i}")));
            }
        }
        let support_nodes: Vec<usize> = (0..n).filter(|&i| obstacle[i].is_finite()).collect();
        let membership = vec![Vec::new(); support_nodes.len()];
        let spacing = estimate_spacing(&cloud);
        Ok(DiscreteProblem {
            spec: None,
            cloud,
            mu,
            boundary_values,
            obstacle,
            initial,
            support: Support {
                pieces: Vec::new(),
                nodes: support_nodes,
                membership,
            },
            spacing,
            barrier_eps: 0.0,
        })
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

    /// Lower barrier `D(x) = W_n(x) − W_n(ε)`.
    pub fn lower_barrier(&self, x: &Point) -> f64 {
        let n = self.dim() as u32;
        let r = (0..self.dim()).map(|d| x[d] * x[d]).sum::<f64>().sqrt();
        w_profile(n, r) - w_profile(n, self.barrier_eps)
    }

    /// Upper barrier `W_n(x) + 10`.
    pub fn upper_barrier(&self, x: &Point) -> f64 {
        let r = (0..self.dim()).map(|d| x[d] * x[d]).sum::<f64>().sqrt();
        w_profile(self.dim() as u32, r) + BOUNDARY_OFFSET
    }
}

/// Offset of the boundary data `W_n + 10`.
pub const BOUNDARY_OFFSET: f64 = 10.0;

fn estimate_spacing(cloud: &PointCloud) -> Vec<f64> {
    // nearest-neighbour distance through the Delaunay envelope of |x|²
    let vals: Vec<f64> = cloud.nodes().iter().map(|p| dot3(p, p)).collect();
    let Ok(f) = lower_convex_envelope(cloud, &vals) else {
        return vec![0.0; cloud.len()];
    };
    (0..cloud.len())
        .map(|i| {
            f.neighbors(i)
                .iter()
                .map(|&j| norm3(&sub3(&cloud.node(i), &cloud.node(j))))
                .fold(f64::INFINITY, f64::min)
        })
        .map(|d| if d.is_finite() { d } else { 0.0 })
        .collect()
}

/// Builds the graded cloud, masses, boundary data, obstacle and starting
/// function of a scenario.
pub fn build_problem(spec: &ScenarioSpec) -> Result<DiscreteProblem> {
    spec.validate()?;
    let n = spec.n;
    let pieces = support_pieces(spec)?;

    // support nodes, shared ones merged
    let mut support_pts: Vec<Point> = Vec::new();
    let mut membership: Vec<Vec<usize>> = Vec::new();
    for (pi, piece) in pieces.iter().enumerate() {
        for p in piece.sample(n, spec.h_min) {
            match support_pts.iter().position(|q| norm3(&sub3(q, &p)) < 1e-12) {
                Some(k) => membership[k].push(pi),
                None => {
                    support_pts.push(p);
                    membership.push(vec![pi]);
                }
            }
        }
    }

    // refined box around the support, aligned with the coarse lattice
    let mut half = [0.0f64; 3];
    for p in &support_pts {
        for d in 0..n {
            half[d] = half[d].max(p[d].abs());
        }
    }
    for d in 0..n {
        half[d] = ((half[d] + spec.tube * spec.eps) / spec.h0 - 1e-9).ceil() * spec.h0;
    }

    let boundary = boundary_points(n, spec.radius, spec.h0);
    let inner_radius = inscribed_radius(n, spec.radius, spec.h0) - 0.5 * spec.h0;
    let near_support = |p: &Point| pieces.iter().any(|pc| pc.distance(p) < 0.5 * spec.h_min);
    let in_box = |p: &Point| (0..n).all(|d| p[d].abs() <= half[d] + 1e-9 * spec.h0);

    let mut fine = Vec::new();
    for p in lattice(n, spec.h_min, &half) {
        if norm3(&p) <= inner_radius && !near_support(&p) {
            fine.push(p);
        }
    }
    let reach = [spec.radius; 3];
    let mut coarse = Vec::new();
    for p in lattice(n, spec.h0, &reach) {
        if norm3(&p) <= inner_radius && !in_box(&p) {
            coarse.push(p);
        }
    }

    let mut nodes = Vec::new();
    let mut tags = Vec::new();
    let mut spacing = Vec::new();
    for p in &boundary {
        nodes.push(*p);
        tags.push(NodeTag::Boundary);
        spacing.push(spec.h0);
    }
    let support_start = nodes.len();
    for p in &support_pts {
        nodes.push(*p);
        tags.push(NodeTag::ObstacleSupport);
        spacing.push(spec.h_min);
    }
    for p in &fine {
        nodes.push(*p);
        tags.push(NodeTag::Interior);
        spacing.push(spec.h_min);
    }
    for p in &coarse {
        nodes.push(*p);
        tags.push(NodeTag::Interior);
        spacing.push(spec.h0);
    }
    let cloud = PointCloud::new(n, nodes, tags)?.with_domain(Domain::Ball {
        center: [0.0; 3],
        radius: spec.radius,
    })?;
    let mu = node_masses(&cloud, spec.radius, spec.h0)?;

    let barrier_eps = support_pts.iter().map(norm3).fold(0.0, f64::max).max(spec.eps);
    let obstacle_of = obstacle_function(spec)?;
    // the boundary data is constant on ∂B_R; start from the paraboloid through
    // it that is non-positive on B_ε
    let top = w_profile(n as u32, spec.radius) + BOUNDARY_OFFSET;
    let curvature = (2.0 * top / (spec.radius.powi(2) - barrier_eps.powi(2))).max(1.0);
    let mut problem = DiscreteProblem {
        spec: Some(spec.clone()),
        boundary_values: vec![f64::NAN; cloud.len()],
        obstacle: vec![f64::INFINITY; cloud.len()],
        initial: vec![0.0; cloud.len()],
        support: Support {
            pieces,
            nodes: (support_start..support_start + support_pts.len()).collect(),
            membership,
        },
        mu,
        spacing,
        barrier_eps,
        cloud,
    };
    for i in 0..problem.len() {
        let x = problem.cloud.node(i);
        if problem.cloud.tag(i).is_boundary() {
            let v = problem.upper_barrier(&x);
            problem.boundary_values[i] = v;
            problem.initial[i] = v;
            continue;
        }
        if problem.cloud.tag(i) == NodeTag::ObstacleSupport {
            problem.obstacle[i] = obstacle_of(&x);
        }
        let start = top + 0.5 * curvature * (dot3(&x, &x) - spec.radius.powi(2));
        problem.initial[i] = start.min(problem.obstacle[i]);
    }
    Ok(problem)
}

fn support_pieces(spec: &ScenarioSpec) -> Result<Vec<Piece>> {
    let n = spec.n;
    let e = spec.eps;
    Ok(match spec.kind {
        ScenarioKind::Segment => {
            if spec.k == 1 {
                let mut a = [0.0; 3];
                let mut b = [0.0; 3];
                a[n - 1] = -e;
                b[n - 1] = e;
                vec![Piece::Segment { a, b }]
            } else {
                vec![Piece::Disk {
                    center: [0.0; 3],
                    radius: e,
                    axis: 0,
                }]
            }
        }
        ScenarioKind::Cross => {
            let h = spec.half_length();
            spec.directions
                .iter()
                .map(|d| {
                    let len = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let mut a = [0.0; 3];
                    let mut b = [0.0; 3];
                    for k in 0..n {
                        a[k] = -h * d[k] / len;
                        b[k] = h * d[k] / len;
                    }
                    Piece::Segment { a, b }
                })
                .collect()
        }
        ScenarioKind::SmoothBoundary => {
            if n != 2 {
                return Err(Error::Config("the smooth-boundary scenario is built in 2-D".into()));
            }
            vec![Piece::Loop {
                center: [0.0; 3],
                radius: spec.sphere_radius,
            }]
        }
        ScenarioKind::PolytopeSkeleton => polytope_pieces(spec)?,
    })
}

/// Parts of the `(n−k)`-skeleton inside `B_ε`.
fn polytope_pieces(spec: &ScenarioSpec) -> Result<Vec<Piece>> {
    let e = spec.eps;
    let verts: Vec<Point> = spec
        .polytope_vertices()
        .iter()
        .map(|v| {
            let mut p = [0.0; 3];
            p[..v.len()].copy_from_slice(v);
            p
        })
        .collect();
    let clip_segment = |a: Point, b: Point| -> Option<Piece> {
        // intersection of [a, b] with the closed ball B_ε
        let d = sub3(&b, &a);
        let (qa, qb, qc) = (dot3(&d, &d), 2.0 * dot3(&a, &d), dot3(&a, &a) - e * e);
        let disc = qb * qb - 4.0 * qa * qc;
        if disc <= 0.0 {
            return None;
        }
        let t0 = ((-qb - disc.sqrt()) / (2.0 * qa)).max(0.0);
        let t1 = ((-qb + disc.sqrt()) / (2.0 * qa)).min(1.0);
        if t1 <= t0 {
            return None;
        }
        let at = |t: f64| [a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]];
        Some(Piece::Segment { a: at(t0), b: at(t1) })
    };
    if spec.n == 2 {
        let m = verts.len();
        let poly: Vec<P2> = verts.iter().map(|p| [p[0], p[1]]).collect();
        if m < 3 || geom::signed_area(&poly) <= 0.0 {
            return Err(Error::Config("polytope must be a counter-clockwise polygon".into()));
        }
        return Ok((0..m).filter_map(|i| clip_segment(verts[i], verts[(i + 1) % m])).collect());
    }
    // 3-D: only axis-aligned boxes are supported as polytopes
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in &verts {
        for d in 0..3 {
            lo[d] = lo[d].min(v[d]);
            hi[d] = hi[d].max(v[d]);
        }
    }
    let is_box = verts.len() == 8
        && verts
            .iter()
            .all(|v| (0..3).all(|d| (v[d] - lo[d]).abs() < 1e-12 || (v[d] - hi[d]).abs() < 1e-12));
    if !is_box {
        return Err(Error::Config("3-D polytope skeleta are built for axis-aligned boxes".into()));
    }
    let mut pieces = Vec::new();
    if spec.k == 1 {
        for axis in 0..3 {
            for side in [lo[axis], hi[axis]] {
                let r2 = e * e - side * side;
                if r2 > 0.0 {
                    let mut c = [0.0; 3];
                    c[axis] = side;
                    pieces.push(Piece::Disk {
                        center: c,
                        radius: r2.sqrt(),
                        axis,
                    });
                }
            }
        }
    } else {
        for axis in 0..3 {
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            for su in [lo[u], hi[u]] {
                for sv in [lo[v], hi[v]] {
                    let mut a = [0.0; 3];
                    a[u] = su;
                    a[v] = sv;
                    let mut b = a;
                    a[axis] = lo[axis];
                    b[axis] = hi[axis];
                    pieces.extend(clip_segment(a, b));
                }
            }
        }
    }
    Ok(pieces)
}

/// Obstacle value at a support node.
fn obstacle_function(spec: &ScenarioSpec) -> Result<Box<dyn Fn(&Point) -> f64>> {
    let tail = TailProfile::new(spec.alpha)?;
    let e = spec.eps;
    let radial = move |p: &Point| e * e * tail.value(norm3(p) / e).to_f64();
    Ok(match spec.kind {
        ScenarioKind::Segment | ScenarioKind::PolytopeSkeleton => Box::new(radial),
        ScenarioKind::Cross => {
            let dirs = spec.directions.clone();
            let n = spec.n;
            Box::new(move |p: &Point| {
                let spread: f64 = dirs.iter().map(|d| dist_to_span(&p[..n], d)).sum();
                radial(p) + spread / (8.0 * dirs.len() as f64)
            })
        }
        ScenarioKind::SmoothBoundary => Box::new(|p: &Point| 0.5 * dot3(p, p)),
    })
}

/// Centred lattice of spacing `h` inside the box `|x_d| ≤ half_d`.
fn lattice(n: usize, h: f64, half: &[f64; 3]) -> Vec<Point> {
    let m: Vec<i64> = (0..3)
        .map(|d| if d < n { (half[d] / h + 1e-9).floor() as i64 } else { 0 })
        .collect();
    let mut out = Vec::new();
    for i in -m[0]..=m[0] {
        for j in -m[1]..=m[1] {
            for k in -m[2]..=m[2] {
                out.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    out
}

fn boundary_vertex_count(radius: f64, h0: f64) -> usize {
    4 * ((2.0 * PI * radius / (4.0 * h0)).ceil() as usize).max(1)
}

/// Vertices of the inscribed polygon (2-D) or the radial projection of a cube
/// surface lattice (3-D) on `∂B_R`, spaced about `h0`; invariant under the
/// coordinate reflections and (in 2-D) quarter turns.
fn boundary_points(n: usize, radius: f64, h0: f64) -> Vec<Point> {
    if n == 2 {
        let m = boundary_vertex_count(radius, h0);
        return (0..m)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / m as f64;
                [radius * t.cos(), radius * t.sin(), 0.0]
            })
            .collect();
    }
    let c = ((PI * radius / 2.0) / h0).ceil().max(1.0) as i64;
    let mut out = Vec::new();
    for i in -c..=c {
        for j in -c..=c {
            for k in -c..=c {
                if i.abs() != c && j.abs() != c && k.abs() != c {
                    continue;
                }
                let p = [i as f64, j as f64, k as f64];
                let r = norm3(&p);
                out.push([radius * p[0] / r, radius * p[1] / r, radius * p[2] / r]);
            }
        }
    }
    out
}

fn inscribed_radius(n: usize, radius: f64, h0: f64) -> f64 {
    if n == 2 {
        radius * (PI / boundary_vertex_count(radius, h0) as f64).cos()
    } else {
        // conservative: the projected cube lattice leaves facets of diameter ≲ 2h0
        (radius * radius - (h0 * h0)).max(0.0).sqrt()
    }
}

/// Lebesgue mass of each node: clipped Voronoi areas in 2-D, barycentric dual
/// volumes of the Delaunay triangulation in 3-D.
fn node_masses(cloud: &PointCloud, radius: f64, h0: f64) -> Result<Vec<f64>> {
    if cloud.dim() == 2 {
        let m = boundary_vertex_count(radius, h0);
        let domain = geom::regular_polygon([0.0, 0.0], radius, m);
        let sites: Vec<P2> = cloud.nodes().iter().map(|p| [p[0], p[1]]).collect();
        let diagram = power_diagram(&sites, &vec![0.0; sites.len()], &domain)?;
        return Ok(diagram.areas);
    }
    let vals: Vec<f64> = cloud.nodes().iter().map(|p| dot3(p, p)).collect();
    let volumes = lower_convex_envelope(cloud, &vals)?.node_volumes();
    Ok(symmetrize(cloud, &volumes))
}

/// Averages node values over every signed coordinate permutation that maps
/// the cloud onto itself. Delaunay triangulations of lattices are not unique,
/// so dual volumes alone need not share the symmetry of the nodes.
fn symmetrize(cloud: &PointCloud, values: &[f64]) -> Vec<f64> {
    let key = |p: &Point| -> [i64; 3] { [0, 1, 2].map(|d| (p[d] * 1e9).round() as i64) };
    let nodes = cloud.nodes();
    let index: HashMap<[i64; 3], usize> = nodes.iter().enumerate().map(|(i, p)| (key(p), i)).collect();
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut images: Vec<Vec<usize>> = Vec::new();
    for perm in perms {
        for signs in 0..8 {
            let image: Option<Vec<usize>> = nodes
                .iter()
                .map(|p| {
                    let q = [0, 1, 2].map(|d| if signs >> d & 1 == 1 { -p[perm[d]] } else { p[perm[d]] });
                    index.get(&key(&q)).copied()
                })
                .collect();
            if let Some(image) = image {
                images.push(image);
            }
        }
    }
    let count = images.len() as f64;
    (0..values.len())
        .map(|i| images.iter().map(|image| values[image[i]]).sum::<f64>() / count)
        .collect()
}
