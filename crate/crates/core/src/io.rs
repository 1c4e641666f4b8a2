//! CSV artifacts. Every number is written with 12 significant digits.

use std::io::Write;

use crate::convex::{lower_convex_envelope, NodeTag, PLConvexFunction, Point, PointCloud};
use crate::geom::P2;
use crate::{Error, Result};

/// Rounds to 12 significant digits and prints the shortest decimal form.
pub fn fmt12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    format!("{rounded}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Parse {
            line: 0,
            msg: format!("{other:?}"),
        },
    }
}

/// Parsed CSV body: header names and rows with their 1-based line numbers.
struct Table {
    header: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

fn read_table(text: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(Table { header, rows })
}

fn expect_header(t: &Table, options: &[&[&str]]) -> Result<usize> {
    for (k, h) in options.iter().enumerate() {
        if t.header.len() == h.len() && t.header.iter().zip(h.iter()).all(|(a, b)| a == b) {
            return Ok(k);
        }
    }
    Err(Error::Parse {
        line: 1,
        msg: format!("unexpected header {:?}", t.header.join(",")),
    })
}

fn num(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("not a number: {s:?}"),
    })?;
    if v.is_nan() {
        return Err(Error::Parse {
            line,
            msg: "NaN is not allowed".into(),
        });
    }
    Ok(v)
}

fn finite(line: usize, s: &str) -> Result<f64> {
    let v = num(line, s)?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite value {s:?}"),
        });
    }
    Ok(v)
}

fn flag(line: usize, s: &str) -> Result<bool> {
    match s {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        _ => Err(Error::Parse {
            line,
            msg: format!("expected 0/1, got {s:?}"),
        }),
    }
}

fn index(line: usize, s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("not an index: {s:?}"),
    })
}

fn coords(dim: usize) -> &'static [&'static str] {
    if dim == 2 {
        &["x", "y"]
    } else {
        &["x", "y", "z"]
    }
}

/// Node data of a piecewise-linear function as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct PlRecord {
    pub dim: usize,
    pub nodes: Vec<Point>,
    pub values: Vec<f64>,
    pub active: Vec<bool>,
}

impl PlRecord {
    /// Recomputes the envelope; every node is tagged interior.
    pub fn to_function(&self) -> Result<PLConvexFunction> {
        let cloud = PointCloud::new(self.dim, self.nodes.clone(), vec![NodeTag::Interior; self.nodes.len()])?;
        lower_convex_envelope(&cloud, &self.values)
    }
}

/// `x,y[,z],u,active` in node order.
pub fn write_pl_csv<W: Write>(f: &PLConvexFunction, out: W) -> Result<()> {
    let dim = f.dim();
    let mut w = writer(out);
    let mut head: Vec<&str> = coords(dim).to_vec();
    head.extend(["u", "active"]);
    w.write_record(&head).map_err(csv_err)?;
    for i in 0..f.len() {
        let p = f.cloud().node(i);
        let mut row: Vec<String> = p[..dim].iter().map(|v| fmt12(*v)).collect();
        row.push(fmt12(f.values()[i]));
        row.push(if f.is_active(i) { "1" } else { "0" }.into());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pl_csv(text: &str) -> Result<PlRecord> {
    let t = read_table(text)?;
    let k = expect_header(&t, &[&["x", "y", "u", "active"], &["x", "y", "z", "u", "active"]])?;
    let dim = 2 + k;
    let mut rec = PlRecord {
        dim,
        nodes: Vec::new(),
        values: Vec::new(),
        active: Vec::new(),
    };
    for (line, r) in &t.rows {
        let mut p = [0.0; 3];
        for d in 0..dim {
            p[d] = finite(*line, &r[d])?;
        }
        rec.nodes.push(p);
        rec.values.push(finite(*line, &r[dim])?);
        rec.active.push(flag(*line, &r[dim + 1])?);
    }
    Ok(rec)
}

/// One row of `solution.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRow {
    pub x: Point,
    pub u: f64,
    pub atom: f64,
    pub mu: f64,
    pub tag: NodeTag,
    pub contact: bool,
}

/// `x,y[,z],u,atom,mu,tag,contact`.
pub fn write_solution_csv<W: Write>(dim: usize, rows: &[SolutionRow], out: W) -> Result<()> {
    let mut w = writer(out);
    let mut head: Vec<&str> = coords(dim).to_vec();
    head.extend(["u", "atom", "mu", "tag", "contact"]);
    w.write_record(&head).map_err(csv_err)?;
    for r in rows {
        let mut row: Vec<String> = r.x[..dim].iter().map(|v| fmt12(*v)).collect();
        row.extend([fmt12(r.u), fmt12(r.atom), fmt12(r.mu)]);
        row.push(r.tag.as_str().into());
        row.push(if r.contact { "1" } else { "0" }.into());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_solution_csv(text: &str) -> Result<(usize, Vec<SolutionRow>)> {
    let t = read_table(text)?;
    let k = expect_header(
        &t,
        &[
            &["x", "y", "u", "atom", "mu", "tag", "contact"],
            &["x", "y", "z", "u", "atom", "mu", "tag", "contact"],
        ],
    )?;
    let dim = 2 + k;
    let mut out = Vec::new();
    for (line, r) in &t.rows {
        let mut x = [0.0; 3];
        for d in 0..dim {
            x[d] = finite(*line, &r[d])?;
        }
        let tag = match r[dim + 3].as_str() {
            "interior" => NodeTag::Interior,
            "boundary" => NodeTag::Boundary,
            "obstacle" => NodeTag::ObstacleSupport,
            other => {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("unknown tag {other:?}"),
                })
            }
        };
        out.push(SolutionRow {
            x,
            u: finite(*line, &r[dim])?,
            atom: num(*line, &r[dim + 1])?,
            mu: num(*line, &r[dim + 2])?,
            tag,
            contact: flag(*line, &r[dim + 4])?,
        });
    }
    Ok((dim, out))
}

/// One sample of a singular density profile: support coordinates (one or two).
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub s: Vec<f64>,
    pub excess: f64,
    pub cell: f64,
    pub f: f64,
}

/// `s1[,s2],excess,cell,f`.
pub fn write_profile_csv<W: Write>(rows: &[ProfileRow], out: W) -> Result<()> {
    let k = rows.first().map_or(1, |r| r.s.len());
    let mut w = writer(out);
    let head: Vec<&str> = if k == 1 {
        vec!["s1", "excess", "cell", "f"]
    } else {
        vec!["s1", "s2", "excess", "cell", "f"]
    };
    w.write_record(&head).map_err(csv_err)?;
    for r in rows {
        let mut row: Vec<String> = r.s.iter().map(|v| fmt12(*v)).collect();
        row.extend([fmt12(r.excess), fmt12(r.cell), fmt12(r.f)]);
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_profile_csv(text: &str) -> Result<Vec<ProfileRow>> {
    let t = read_table(text)?;
    let k = 1 + expect_header(&t, &[&["s1", "excess", "cell", "f"], &["s1", "s2", "excess", "cell", "f"]])?;
    let mut out = Vec::new();
    for (line, r) in &t.rows {
        out.push(ProfileRow {
            s: (0..k).map(|d| finite(*line, &r[d])).collect::<Result<_>>()?,
            excess: finite(*line, &r[k])?,
            cell: finite(*line, &r[k + 1])?,
            f: finite(*line, &r[k + 2])?,
        });
    }
    Ok(out)
}

/// One edge of a detected singular graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentRow {
    pub a: P2,
    pub b: P2,
    pub f: f64,
}

/// `x1,y1,x2,y2,f`.
pub fn write_singular_csv<W: Write>(rows: &[SegmentRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["x1", "y1", "x2", "y2", "f"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([fmt12(r.a[0]), fmt12(r.a[1]), fmt12(r.b[0]), fmt12(r.b[1]), fmt12(r.f)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_singular_csv(text: &str) -> Result<Vec<SegmentRow>> {
    let t = read_table(text)?;
    expect_header(&t, &[&["x1", "y1", "x2", "y2", "f"]])?;
    let mut out = Vec::new();
    for (line, r) in &t.rows {
        let v: Vec<f64> = r.iter().map(|s| finite(*line, s)).collect::<Result<_>>()?;
        out.push(SegmentRow {
            a: [v[0], v[1]],
            b: [v[2], v[3]],
            f: v[4],
        });
    }
    Ok(out)
}

/// One point of a displacement-interpolation frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRow {
    pub x: P2,
    pub cell: usize,
}

/// `x,y,cell`.
pub fn write_frame_csv<W: Write>(rows: &[FrameRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["x", "y", "cell"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([fmt12(r.x[0]), fmt12(r.x[1]), r.cell.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_frame_csv(text: &str) -> Result<Vec<FrameRow>> {
    let t = read_table(text)?;
    expect_header(&t, &[&["x", "y", "cell"]])?;
    let mut out = Vec::new();
    for (line, r) in &t.rows {
        out.push(FrameRow {
            x: [finite(*line, &r[0])?, finite(*line, &r[1])?],
            cell: index(*line, &r[2])?,
        });
    }
    Ok(out)
}
