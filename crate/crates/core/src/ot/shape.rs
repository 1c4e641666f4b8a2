use serde::{Deserialize, Serialize};

use crate::geom::{self, P2};
use crate::{Error, Result};

/// The transport examples: a convex source and a nonconvex target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeName {
    /// Unit disk to its two halves pushed apart by `±e₁`.
    SplitBall,
    /// Diamond `|x| + |y| < 1` to the square `max(|x|, |y|) < 1` minus the diamond.
    FramedDiamond,
    /// Square `λQ` to the frame `Q ∖ λQ`.
    SquareFrame,
    /// Unit disk to the disk minus the wedge `y ≥ m|x|`.
    Pacman,
    /// Unit disk to the disk minus the ellipse `x² + y²/e < r²`.
    CatsEye,
    /// User-supplied convex source and simple target polygon.
    Custom,
}

impl ShapeName {
    pub const ALL: [ShapeName; 6] = [
        ShapeName::SplitBall,
        ShapeName::FramedDiamond,
        ShapeName::SquareFrame,
        ShapeName::Pacman,
        ShapeName::CatsEye,
        ShapeName::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ShapeName::SplitBall => "split_ball",
            ShapeName::FramedDiamond => "framed_diamond",
            ShapeName::SquareFrame => "square_frame",
            ShapeName::Pacman => "pacman",
            ShapeName::CatsEye => "cats_eye",
            ShapeName::Custom => "custom",
        }
    }

    /// Accepts both `framed_diamond` and `framed-diamond`.
    pub fn parse(name: &str) -> Result<ShapeName> {
        let key = name.replace('-', "_");
        ShapeName::ALL
            .into_iter()
            .find(|s| s.as_str() == key)
            .ok_or_else(|| Error::Config(format!("unknown example '{name}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapeSpec {
    pub name: ShapeName,
    /// Scale of the inner square of the square frame.
    pub lambda: f64,
    /// Slope of the pacman mouth.
    pub m: f64,
    /// Elongation of the cat's-eye ellipse.
    pub e: f64,
    /// Squared semi-axis of the cat's-eye ellipse.
    pub r2: f64,
    /// Vertex count of the polygons inscribed in curved boundaries.
    pub polygon_count: usize,
    /// Custom source polygon (convex, counter-clockwise).
    pub source: Vec<P2>,
    /// Custom target polygon (simple).
    pub target: Vec<P2>,
}

impl Default for ShapeSpec {
    fn default() -> Self {
        ShapeSpec {
            name: ShapeName::SplitBall,
            lambda: 0.8,
            m: 2.0,
            e: 5.0,
            r2: 2.0 / 15.0,
            polygon_count: 256,
            source: Vec::new(),
            target: Vec::new(),
        }
    }
}

/// Sites in the target shape with equal masses summing to the source area.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub sites: Vec<P2>,
    pub masses: Vec<f64>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

impl ShapeSpec {
    pub fn new(name: ShapeName) -> Self {
        ShapeSpec {
            name,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad(format!("lambda must lie in (0, 1), got {}", self.lambda));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return bad(format!("m must be positive, got {}", self.m));
        }
        if !(self.e > 1.0 && self.e.is_finite()) {
            return bad(format!("e must exceed 1, got {}", self.e));
        }
        if !(self.r2 > 0.0 && self.r2 < 1.0 && self.r2 * self.e < 1.0) {
            return bad(format!("the ellipse with r2 = {} and e = {} must lie inside the unit disk", self.r2, self.e));
        }
        if self.polygon_count < 16 || !self.polygon_count.is_multiple_of(8) {
            return bad(format!("polygon_count must be a multiple of 8 and at least 16, got {}", self.polygon_count));
        }
        if self.name == ShapeName::Custom {
            if self.source.len() < 3 || !is_convex_ccw(&self.source) {
                return bad("custom source must be a convex counter-clockwise polygon".into());
            }
            if self.target.len() < 3 || geom::area(&self.target) <= 0.0 {
                return bad("custom target must be a polygon with positive area".into());
            }
        } else if !self.source.is_empty() || !self.target.is_empty() {
            return bad("source and target polygons are only accepted for the custom example".into());
        }
        Ok(())
    }

    /// The convex side, as a counter-clockwise polygon.
    pub fn source_polygon(&self) -> Vec<P2> {
        match self.name {
            ShapeName::SplitBall | ShapeName::Pacman | ShapeName::CatsEye => {
                geom::regular_polygon([0.0, 0.0], 1.0, self.polygon_count)
            }
            ShapeName::FramedDiamond => vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
            ShapeName::SquareFrame => geom::square(-self.lambda, self.lambda),
            ShapeName::Custom => self.source.clone(),
        }
    }

    /// Membership in the open nonconvex side.
    pub fn contains_target(&self, p: P2) -> bool {
        let [x, y] = p;
        let r2 = x * x + y * y;
        let sup = x.abs().max(y.abs());
        match self.name {
            ShapeName::SplitBall => (x > 1.0 && (x - 1.0).powi(2) + y * y < 1.0) || (x < -1.0 && (x + 1.0).powi(2) + y * y < 1.0),
            ShapeName::FramedDiamond => sup < 1.0 && x.abs() + y.abs() > 1.0,
            ShapeName::SquareFrame => sup < 1.0 && sup > self.lambda,
            ShapeName::Pacman => r2 < 1.0 && y < self.m * x.abs(),
            ShapeName::CatsEye => r2 < 1.0 && x * x + y * y / self.e > self.r2,
            ShapeName::Custom => in_polygon(&self.target, p),
        }
    }

    /// Box `[lo, hi]` containing the target.
    pub fn target_bounds(&self) -> (P2, P2) {
        match self.name {
            ShapeName::SplitBall => ([-2.0, -1.0], [2.0, 1.0]),
            ShapeName::Custom => {
                let lo = self.target.iter().fold([f64::INFINITY; 2], |a, p| [a[0].min(p[0]), a[1].min(p[1])]);
                let hi = self
                    .target
                    .iter()
                    .fold([f64::NEG_INFINITY; 2], |a, p| [a[0].max(p[0]), a[1].max(p[1])]);
                (lo, hi)
            }
            _ => ([-1.0, -1.0], [1.0, 1.0]),
        }
    }

    /// Linear maps `[[a, b], [c, d]]` under which source and target are invariant.
    pub fn symmetries(&self) -> Vec<[[f64; 2]; 2]> {
        let flip_x = [[-1.0, 0.0], [0.0, 1.0]];
        let flip_y = [[1.0, 0.0], [0.0, -1.0]];
        let swap = [[0.0, 1.0], [1.0, 0.0]];
        let anti = [[0.0, -1.0], [-1.0, 0.0]];
        match self.name {
            ShapeName::SplitBall | ShapeName::CatsEye => vec![flip_x, flip_y],
            ShapeName::FramedDiamond | ShapeName::SquareFrame => vec![flip_x, flip_y, swap, anti],
            ShapeName::Pacman => vec![flip_x],
            ShapeName::Custom => Vec::new(),
        }
    }

    /// The finite group generated by [`ShapeSpec::symmetries`], identity first.
    pub fn symmetry_group(&self) -> Vec<[[f64; 2]; 2]> {
        let mut group = vec![[[1.0, 0.0], [0.0, 1.0]]];
        let gens = self.symmetries();
        let mut k = 0;
        while k < group.len() {
            for g in &gens {
                let m = mat_mul(*g, group[k]);
                if !group.contains(&m) {
                    group.push(m);
                }
            }
            k += 1;
        }
        group
    }

    /// `N` sites made of symmetry orbits: Halton points (bases 2 and 3) over
    /// the target box that lie in the target and are the lexicographically
    /// largest member of their orbit, each followed by its images. `N` must
    /// be a multiple of the symmetry group order.
    pub fn sample(&self, n: usize) -> Result<SampleSet> {
        self.validate()?;
        if n < 4 {
            return Err(Error::Config(format!("at least 4 sites are required, got {n}")));
        }
        let group = self.symmetry_group();
        if !n.is_multiple_of(group.len()) {
            return Err(Error::Config(format!(
                "{} sites requested; the {} example needs a multiple of {}",
                n,
                self.name.as_str(),
                group.len()
            )));
        }
        let (lo, hi) = self.target_bounds();
        let mut sites = Vec::with_capacity(n);
        let budget = 100 * n;
        let mut k = 1u64;
        while sites.len() < n {
            if k as usize > budget {
                return Err(Error::Config(format!(
                    "target acceptance rate below 1% ({} of {budget} draws)",
                    sites.len()
                )));
            }
            let p = [
                lo[0] + (hi[0] - lo[0]) * radical_inverse(k, 2),
                lo[1] + (hi[1] - lo[1]) * radical_inverse(k, 3),
            ];
            k += 1;
            if !self.contains_target(p) {
                continue;
            }
            let orbit: Vec<P2> = group.iter().map(|g| apply(*g, p)).collect();
            let canonical = orbit[1..].iter().all(|q| (p[0], p[1]) > (q[0], q[1]));
            if canonical {
                sites.extend(orbit);
            }
        }
        let area = geom::area(&self.source_polygon());
        Ok(SampleSet {
            masses: vec![area / n as f64; n],
            sites,
        })
    }
}

/// `m · p`.
pub fn apply(m: [[f64; 2]; 2], p: P2) -> P2 {
    [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]]
}

fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Van der Corput radical inverse of `k` in `base`.
pub fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * f;
        k /= base;
        f *= inv;
    }
    out
}

pub(crate) fn is_convex_ccw(poly: &[P2]) -> bool {
    let n = poly.len();
    geom::signed_area(poly) > 0.0
        && (0..n).all(|i| {
            let (a, b, c) = (poly[i], poly[(i + 1) % n], poly[(i + 2) % n]);
            geom::cross(geom::sub(b, a), geom::sub(c, b)) >= 0.0
        })
}

/// Even-odd point-in-polygon test.
fn in_polygon(poly: &[P2], p: P2) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}
