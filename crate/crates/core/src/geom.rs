//! Small fixed-size vector and convex-polygon utilities shared by the
//! Monge–Ampère and transport code.

pub type P2 = [f64; 2];

#[inline]
pub fn add(a: P2, b: P2) -> P2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(a: P2, s: f64) -> P2 {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: P2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: P2, b: P2) -> f64 {
    norm(sub(a, b))
}

/// Signed area (positive for counter-clockwise vertex order).
pub fn signed_area(poly: &[P2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        s += cross(poly[i], poly[(i + 1) % n]);
    }
    0.5 * s
}

pub fn area(poly: &[P2]) -> f64 {
    signed_area(poly).abs()
}

/// Area centroid of a simple polygon; falls back to the vertex mean for
/// degenerate input.
pub fn centroid(poly: &[P2]) -> P2 {
    let a = signed_area(poly);
    if a.abs() < 1e-300 {
        let n = poly.len().max(1) as f64;
        let s = poly.iter().fold([0.0, 0.0], |acc, p| add(acc, *p));
        return scale(s, 1.0 / n);
    }
    let n = poly.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let c = cross(p, q);
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

/// `∫_poly |x − a|² dx` for a simple polygon.
pub fn second_moment_about(poly: &[P2], a: P2) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let p = sub(poly[i], a);
        let q = sub(poly[(i + 1) % n], a);
        let c = cross(p, q);
        s += c * (dot(p, p) + dot(p, q) + dot(q, q));
    }
    (s / 12.0).abs()
}

/// A convex polygon edge label: which constraint produced the edge.
pub type EdgeLabel = i64;

/// Label for edges inherited from the clipping domain.
pub const DOMAIN_EDGE: EdgeLabel = -1;

/// Convex polygon whose edge `i` runs from `verts[i]` to `verts[i+1]` and is
/// tagged with `labels[i]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledPolygon {
    pub verts: Vec<P2>,
    pub labels: Vec<EdgeLabel>,
}

impl LabeledPolygon {
    pub fn from_domain(verts: &[P2]) -> Self {
        LabeledPolygon {
            verts: verts.to_vec(),
            labels: vec![DOMAIN_EDGE; verts.len()],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.verts.len() < 3
    }

    pub fn area(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            area(&self.verts)
        }
    }

    /// Keeps the part `{x : ⟨n, x⟩ ≤ b}`; the new edge is tagged `label`.
    pub fn clip(&mut self, n: P2, b: f64, label: EdgeLabel) {
        let m = self.verts.len();
        if m == 0 {
            return;
        }
        let scale_n = norm(n).max(1e-300);
        let side: Vec<f64> = self.verts.iter().map(|v| (dot(n, *v) - b) / scale_n).collect();
        if side.iter().all(|s| *s <= 0.0) {
            return;
        }
        if side.iter().all(|s| *s >= 0.0) {
            self.verts.clear();
            self.labels.clear();
            return;
        }
        let mut verts = Vec::with_capacity(m + 1);
        let mut labels = Vec::with_capacity(m + 1);
        for i in 0..m {
            let j = (i + 1) % m;
            let (si, sj) = (side[i], side[j]);
            let (p, q) = (self.verts[i], self.verts[j]);
            if si <= 0.0 {
                verts.push(p);
                if sj <= 0.0 {
                    labels.push(self.labels[i]);
                } else {
                    // leaving: edge i is cut, then the new constraint edge starts
                    labels.push(self.labels[i]);
                    let t = si / (si - sj);
                    verts.push(add(p, scale(sub(q, p), t)));
                    labels.push(label);
                }
            } else if sj <= 0.0 {
                // entering
                let t = si / (si - sj);
                verts.push(add(p, scale(sub(q, p), t)));
                labels.push(self.labels[i]);
            }
        }
        self.verts = verts;
        self.labels = labels;
        self.drop_tiny_edges();
    }

    fn drop_tiny_edges(&mut self) {
        let n = self.verts.len();
        if n < 2 {
            return;
        }
        let diam = self
            .verts
            .iter()
            .map(|v| v[0].abs().max(v[1].abs()))
            .fold(0.0, f64::max)
            .max(1.0);
        let tol = 1e-14 * diam;
        let mut verts = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let j = (i + 1) % n;
            if dist(self.verts[i], self.verts[j]) <= tol && n > 3 {
                continue;
            }
            verts.push(self.verts[i]);
            labels.push(self.labels[i]);
        }
        self.verts = verts;
        self.labels = labels;
    }
}

/// Convex hull (counter-clockwise, no collinear points) by Andrew's monotone chain.
pub fn convex_hull(points: &[P2]) -> Vec<P2> {
    let mut pts: Vec<P2> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<P2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2
            && cross(sub(lower[lower.len() - 1], lower[lower.len() - 2]), sub(p, lower[lower.len() - 2])) <= 0.0
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<P2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(sub(upper[upper.len() - 1], upper[upper.len() - 2]), sub(p, upper[upper.len() - 2])) <= 0.0
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Point-in-convex-polygon test (counter-clockwise polygon), with slack `tol`.
pub fn in_convex_polygon(poly: &[P2], p: P2, tol: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = sub(b, a);
        cross(e, sub(p, a)) >= -tol * norm(e)
    })
}

/// Distance from `p` to the boundary of a polygon.
pub fn dist_to_boundary(poly: &[P2], p: P2) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| point_segment_dist(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

pub fn point_segment_dist(p: P2, a: P2, b: P2) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    if l2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / l2).clamp(0.0, 1.0);
    dist(p, add(a, scale(ab, t)))
}

pub fn segment_segment_dist(a: P2, b: P2, c: P2, d: P2) -> f64 {
    let o1 = cross(sub(b, a), sub(c, a));
    let o2 = cross(sub(b, a), sub(d, a));
    let o3 = cross(sub(d, c), sub(a, c));
    let o4 = cross(sub(d, c), sub(b, c));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return 0.0;
    }
    point_segment_dist(a, c, d)
        .min(point_segment_dist(b, c, d))
        .min(point_segment_dist(c, a, b))
        .min(point_segment_dist(d, a, b))
}

/// Regular polygon inscribed in the circle of radius `r` around `center`,
/// first vertex at angle 0, counter-clockwise.
pub fn regular_polygon(center: P2, r: f64, count: usize) -> Vec<P2> {
    (0..count)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / count as f64;
            [center[0] + r * t.cos(), center[1] + r * t.sin()]
        })
        .collect()
}

/// Square `[lo, hi]²` as a counter-clockwise polygon.
pub fn square(lo: f64, hi: f64) -> Vec<P2> {
    vec![[lo, lo], [hi, lo], [hi, hi], [lo, hi]]
}

/// Volume of the bounded polytope `{p : ⟨a_k, p⟩ ≤ b_k}` in 2 or 3 dimensions by
/// vertex enumeration. Returns 0 for empty or lower-dimensional sets.
pub fn halfspace_polytope_volume(dim: usize, normals: &[[f64; 3]], offsets: &[f64]) -> f64 {
    let verts = halfspace_polytope_vertices(dim, normals, offsets);
    crate::hull::hull_volume(dim, &verts)
}

/// Vertices of `{p : ⟨a_k, p⟩ ≤ b_k}` in dimension 2 or 3 (brute force over
/// `dim`-subsets of constraints).
pub fn halfspace_polytope_vertices(dim: usize, normals: &[[f64; 3]], offsets: &[f64]) -> Vec<[f64; 3]> {
    let m = normals.len();
    let mut out = Vec::new();
    let scale = offsets.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    let feasible = |p: &[f64; 3]| {
        (0..m).all(|k| {
            let v = normals[k][0] * p[0] + normals[k][1] * p[1] + normals[k][2] * p[2];
            v <= offsets[k] + 1e-10 * scale
        })
    };
    if dim == 2 {
        for i in 0..m {
            for j in (i + 1)..m {
                let (a, b) = (normals[i], normals[j]);
                let det = a[0] * b[1] - a[1] * b[0];
                if det.abs() < 1e-14 {
                    continue;
                }
                let x = (offsets[i] * b[1] - offsets[j] * a[1]) / det;
                let y = (a[0] * offsets[j] - b[0] * offsets[i]) / det;
                let p = [x, y, 0.0];
                if feasible(&p) {
                    out.push(p);
                }
            }
        }
    } else {
        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    let rows = [normals[i], normals[j], normals[k]];
                    let rhs = [offsets[i], offsets[j], offsets[k]];
                    if let Some(p) = crate::linalg::solve3(rows, rhs) {
                        if feasible(&p) {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_square_by_diagonal() {
        let mut p = LabeledPolygon::from_domain(&square(0.0, 1.0));
        p.clip([1.0, 1.0], 1.0, 7);
        assert!((p.area() - 0.5).abs() < 1e-15);
        assert!(p.labels.contains(&7));
        assert_eq!(p.verts.len(), p.labels.len());
    }

    #[test]
    fn clip_to_empty() {
        let mut p = LabeledPolygon::from_domain(&square(0.0, 1.0));
        p.clip([1.0, 0.0], -0.1, 0);
        assert!(p.is_empty());
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!((signed_area(&h) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_moments() {
        let sq = square(-0.5, 0.5);
        // ∫ |x|² over the unit square centred at 0 = 1/6
        assert!((second_moment_about(&sq, [0.0, 0.0]) - 1.0 / 6.0).abs() < 1e-14);
        let c = centroid(&square(0.0, 2.0));
        assert!((c[0] - 1.0).abs() < 1e-15 && (c[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polytope_volume_cube() {
        let normals = [
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let v = halfspace_polytope_volume(3, &normals, &[1.0; 6]);
        assert!((v - 8.0).abs() < 1e-9);
        let v2 = halfspace_polytope_volume(2, &normals[..4], &[1.0; 4]);
        assert!((v2 - 4.0).abs() < 1e-12);
    }
}
