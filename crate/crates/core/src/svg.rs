//! Deterministic SVG figures: fixed viewport, fixed hue per index, fixed
//! number formatting.

use std::fmt::Write;

use crate::geom::{LabeledPolygon, P2};
use crate::io::{FrameRow, ProfileRow, SegmentRow};

/// Canvas size in pixels.
pub const SIZE: f64 = 640.0;
const MARGIN: f64 = 48.0;

/// World rectangle `[lo, hi]` mapped onto the canvas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct View {
    pub lo: P2,
    pub hi: P2,
    /// Keep one unit equal along both axes.
    pub equal: bool,
}

impl View {
    pub fn new(lo: P2, hi: P2) -> View {
        View { lo, hi, equal: true }
    }

    /// Bounding box of `points` padded by 5%, or the unit square when empty.
    pub fn fit(points: impl IntoIterator<Item = P2>) -> View {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        if !(lo[0] <= hi[0] && lo[1] <= hi[1]) {
            return View::new([-1.0, -1.0], [1.0, 1.0]);
        }
        let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        View::new([lo[0] - pad, lo[1] - pad], [hi[0] + pad, hi[1] + pad])
    }

    fn scales(&self) -> (f64, f64) {
        let inner = SIZE - 2.0 * MARGIN;
        let sx = inner / (self.hi[0] - self.lo[0]).max(1e-300);
        let sy = inner / (self.hi[1] - self.lo[1]).max(1e-300);
        if self.equal {
            let s = sx.min(sy);
            (s, s)
        } else {
            (sx, sy)
        }
    }

    /// Canvas coordinates; `y` points down.
    pub fn map(&self, p: P2) -> P2 {
        let (sx, sy) = self.scales();
        [MARGIN + (p[0] - self.lo[0]) * sx, SIZE - MARGIN - (p[1] - self.lo[1]) * sy]
    }
}

/// Fill colour of index `i`: golden-angle hue steps.
pub fn hue(i: usize) -> String {
    let h = (i as f64 * 137.507_764_050_037_85) % 360.0;
    format!("hsl({h:.1},65%,55%)")
}

fn num(v: f64) -> String {
    format!("{v:.2}")
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

struct Canvas {
    view: View,
    body: String,
}

impl Canvas {
    fn new(view: View, title: &str) -> Canvas {
        let mut body = String::new();
        writeln!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">",
            s = SIZE
        )
        .unwrap();
        writeln!(body, "<title>{}</title>", escape(title)).unwrap();
        writeln!(body, "<rect width=\"{s}\" height=\"{s}\" fill=\"white\"/>", s = SIZE).unwrap();
        let mut c = Canvas { view, body };
        c.axes();
        c
    }

    fn axes(&mut self) {
        let v = self.view;
        let a = v.map(v.lo);
        let b = v.map(v.hi);
        writeln!(
            self.body,
            "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/></g>",
            num(a[0]),
            num(b[1]),
            num(b[0] - a[0]),
            num(a[1] - b[1])
        )
        .unwrap();
        self.body += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let x = v.lo[0] + t * (v.hi[0] - v.lo[0]);
            let y = v.lo[1] + t * (v.hi[1] - v.lo[1]);
            let px = v.map([x, v.lo[1]]);
            let py = v.map([v.lo[0], y]);
            writeln!(
                self.body,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                num(px[0]),
                num(px[1] + 16.0),
                label(x)
            )
            .unwrap();
            writeln!(
                self.body,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
                num(py[0] - 6.0),
                num(py[1] + 4.0),
                label(y)
            )
            .unwrap();
        }
        self.body += "</g>\n";
    }

    fn polygon(&mut self, verts: &[P2], fill: &str, stroke: &str) {
        let pts: Vec<String> = verts
            .iter()
            .map(|p| {
                let q = self.view.map(*p);
                format!("{},{}", num(q[0]), num(q[1]))
            })
            .collect();
        writeln!(
            self.body,
            "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"{stroke}\" stroke-width=\"0.3\"/>",
            pts.join(" ")
        )
        .unwrap();
    }

    fn polyline(&mut self, pts: &[P2], stroke: &str, width: f64, dash: bool) {
        let s: Vec<String> = pts
            .iter()
            .map(|p| {
                let q = self.view.map(*p);
                format!("{},{}", num(q[0]), num(q[1]))
            })
            .collect();
        let dash = if dash { " stroke-dasharray=\"6 4\"" } else { "" };
        writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"{dash}/>",
            s.join(" "),
            num(width)
        )
        .unwrap();
    }

    fn line(&mut self, a: P2, b: P2, stroke: &str, width: f64) {
        let (p, q) = (self.view.map(a), self.view.map(b));
        writeln!(
            self.body,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" stroke-width=\"{}\"/>",
            num(p[0]),
            num(p[1]),
            num(q[0]),
            num(q[1]),
            num(width)
        )
        .unwrap();
    }

    fn dot(&mut self, p: P2, fill: &str) {
        let q = self.view.map(p);
        writeln!(self.body, "<circle cx=\"{}\" cy=\"{}\" r=\"1.2\" fill=\"{fill}\"/>", num(q[0]), num(q[1])).unwrap();
    }

    fn finish(mut self) -> String {
        self.body += "</svg>\n";
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One displacement frame: points coloured by their cell.
pub fn frame_svg(rows: &[FrameRow], view: View, title: &str) -> String {
    let mut c = Canvas::new(view, title);
    for r in rows {
        c.dot(r.x, &hue(r.cell));
    }
    c.finish()
}

/// Power cells filled by site index, singular edges overdrawn.
pub fn cells_svg(cells: &[LabeledPolygon], singular: &[SegmentRow], view: View, title: &str) -> String {
    let mut c = Canvas::new(view, title);
    for (i, cell) in cells.iter().enumerate() {
        if !cell.is_empty() {
            c.polygon(&cell.verts, &hue(i), "white");
        }
    }
    for e in singular {
        c.line(e.a, e.b, "black", 2.0);
    }
    c.finish()
}

/// Singular edges with stroke width growing with the density.
pub fn singular_svg(edges: &[SegmentRow], view: View, title: &str) -> String {
    let mut c = Canvas::new(view, title);
    let top = edges.iter().map(|e| e.f).fold(0.0, f64::max);
    for e in edges {
        let w = if top > 0.0 { 0.5 + 2.5 * e.f / top } else { 1.0 };
        c.line(e.a, e.b, "crimson", w);
    }
    c.finish()
}

/// Density `f` against the first profile coordinate, with a dashed
/// horizontal reference line at `reference`.
pub fn profile_svg(rows: &[ProfileRow], reference: Option<f64>, title: &str) -> String {
    let mut pts: Vec<P2> = rows.iter().map(|r| [r.s[0], r.f]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut bounds: Vec<P2> = pts.clone();
    if let Some(f) = reference {
        bounds.push([pts.first().map_or(-1.0, |p| p[0]), f]);
        bounds.push([pts.first().map_or(-1.0, |p| p[0]), 0.0]);
    }
    let mut view = View::fit(bounds);
    view.equal = false;
    let mut c = Canvas::new(view, title);
    if let Some(f) = reference {
        c.polyline(&[[view.lo[0], f], [view.hi[0], f]], "gray", 1.0, true);
    }
    if !pts.is_empty() {
        c.polyline(&pts, "navy", 1.5, false);
    }
    c.finish()
}
