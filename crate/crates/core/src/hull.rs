//! Convex-hull backend. Lower envelopes of lifted point sets and hull volumes
//! are delegated to Qhull.

use qhull::Qh;

use crate::geom;
use crate::{Error, Result};

/// Simplices (as node indices, `dim + 1` each) of the lower convex envelope of
/// the lifted points `(x_i, values_i)`.
///
/// A single apex is added high above the data so the lifted set is always
/// full-dimensional; every hull facet not incident to the apex is then a lower
/// facet. Simplices whose projection has (relative) zero volume are dropped.
pub fn lower_envelope_simplices(dim: usize, nodes: &[[f64; 3]], values: &[f64]) -> Result<Vec<Vec<usize>>> {
    assert!(dim == 2 || dim == 3);
    let n = nodes.len();
    if n < dim + 1 {
        return Err(Error::Degenerate(format!("{n} nodes cannot span dimension {dim}")));
    }
    let (vmin, vmax) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let mut centre = [0.0; 3];
    let mut extent: f64 = 0.0;
    for p in nodes {
        for d in 0..dim {
            centre[d] += p[d] / n as f64;
        }
    }
    for p in nodes {
        for d in 0..dim {
            extent = extent.max((p[d] - centre[d]).abs());
        }
    }
    let apex_height = vmax + (vmax - vmin) + extent.max(1.0);

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for (p, v) in nodes.iter().zip(values) {
        let mut row = p[..dim].to_vec();
        row.push(*v);
        pts.push(row);
    }
    let mut apex = centre[..dim].to_vec();
    apex.push(apex_height);
    pts.push(apex);

    let qh = Qh::builder()
        .compute(true)
        .triangulate(true)
        .capture_stdout(true)
        .capture_stderr(true)
        .build_from_iter(pts)
        .map_err(|e| Error::Hull(format!("{e:?}")))?;

    let scale_vol = extent.max(1e-300).powi(dim as i32);
    let mut out = Vec::new();
    for f in qh.simplices() {
        let Some(vs) = f.vertices() else { continue };
        let ids: Vec<usize> = vs.iter().filter_map(|v| v.index(&qh)).collect();
        if ids.len() != dim + 1 || ids.contains(&n) {
            continue;
        }
        if let Some(nrm) = f.normal() {
            if nrm[dim] >= 0.0 {
                continue;
            }
        }
        let vol = simplex_volume(dim, &ids.iter().map(|&i| nodes[i]).collect::<Vec<_>>());
        if vol <= 1e-13 * scale_vol {
            continue;
        }
        out.push(ids);
    }
    if out.is_empty() {
        return Err(Error::Degenerate("lower envelope has no full-dimensional facets".into()));
    }
    Ok(out)
}

/// Unsigned volume of a simplex given by `dim + 1` points.
pub fn simplex_volume(dim: usize, p: &[[f64; 3]]) -> f64 {
    if dim == 2 {
        let a = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
        let b = [p[2][0] - p[0][0], p[2][1] - p[0][1]];
        0.5 * (a[0] * b[1] - a[1] * b[0]).abs()
    } else {
        let m = [
            [p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]],
            [p[2][0] - p[0][0], p[2][1] - p[0][1], p[2][2] - p[0][2]],
            [p[3][0] - p[0][0], p[3][1] - p[0][1], p[3][2] - p[0][2]],
        ];
        crate::linalg::det3(m).abs() / 6.0
    }
}

/// Volume of the convex hull of a point set in dimension 2 or 3; zero when the
/// set is lower-dimensional.
pub fn hull_volume(dim: usize, pts: &[[f64; 3]]) -> f64 {
    if pts.len() < dim + 1 {
        return 0.0;
    }
    if dim == 2 {
        let p2: Vec<geom::P2> = pts.iter().map(|p| [p[0], p[1]]).collect();
        return geom::area(&geom::convex_hull(&p2));
    }
    // cheap rejection of flat sets before calling qhull
    let spread = pts
        .iter()
        .flat_map(|p| p.iter().copied())
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(1e-300);
    let mut dedup: Vec<[f64; 3]> = Vec::with_capacity(pts.len());
    for p in pts {
        if !dedup.iter().any(|q| (0..3).all(|d| (p[d] - q[d]).abs() <= 1e-13 * spread)) {
            dedup.push(*p);
        }
    }
    if dedup.len() < 4 {
        return 0.0;
    }
    let centre = dedup.iter().fold([0.0; 3], |mut acc, p| {
        for d in 0..3 {
            acc[d] += p[d] / dedup.len() as f64;
        }
        acc
    });
    let qh = match Qh::builder()
        .compute(true)
        .triangulate(true)
        .capture_stdout(true)
        .capture_stderr(true)
        .build_from_iter(dedup.iter().map(|p| p.to_vec()))
    {
        Ok(q) => q,
        Err(_) => return 0.0,
    };
    let mut vol = 0.0;
    for f in qh.simplices() {
        let Some(vs) = f.vertices() else { continue };
        let ids: Vec<usize> = vs.iter().filter_map(|v| v.index(&qh)).collect();
        if ids.len() != 3 {
            continue;
        }
        vol += simplex_volume(3, &[dedup[ids[0]], dedup[ids[1]], dedup[ids[2]], centre]);
    }
    vol
}

/// Indices of the points that are vertices of their convex hull.
pub fn hull_vertex_indices(dim: usize, pts: &[[f64; 3]]) -> Vec<usize> {
    if dim == 3 && pts.len() <= 4 {
        return (0..pts.len()).collect();
    }
    if dim == 2 {
        let p2: Vec<geom::P2> = pts.iter().map(|p| [p[0], p[1]]).collect();
        let h = geom::convex_hull(&p2);
        let mut out: Vec<usize> = (0..pts.len()).filter(|&i| h.contains(&p2[i])).collect();
        out.dedup_by_key(|i| (pts[*i][0].to_bits(), pts[*i][1].to_bits()));
        return out;
    }
    let Ok(qh) = Qh::builder()
        .compute(true)
        .capture_stdout(true)
        .capture_stderr(true)
        .build_from_iter(pts.iter().map(|p| p.to_vec()))
    else {
        return (0..pts.len()).collect();
    };
    let mut out: Vec<usize> = qh.all_vertices().filter_map(|v| v.index(&qh)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paraboloid_grid_is_fully_triangulated() {
        let mut nodes = Vec::new();
        let mut vals = Vec::new();
        for i in 0..11 {
            for j in 0..11 {
                let x = -1.0 + 0.2 * i as f64;
                let y = -1.0 + 0.2 * j as f64;
                nodes.push([x, y, 0.0]);
                vals.push(x * x + y * y);
            }
        }
        let s = lower_envelope_simplices(2, &nodes, &vals).unwrap();
        let total: f64 = s
            .iter()
            .map(|t| simplex_volume(2, &t.iter().map(|&i| nodes[i]).collect::<Vec<_>>()))
            .sum();
        assert!((total - 4.0).abs() < 1e-12);
        assert_eq!(s.len(), 200);
    }

    #[test]
    fn flat_data_still_triangulates() {
        let nodes = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.5, 0.5, 0.0]];
        let vals: Vec<f64> = nodes.iter().map(|p| 2.0 * p[0] - p[1] + 3.0).collect();
        let s = lower_envelope_simplices(2, &nodes, &vals).unwrap();
        let total: f64 = s
            .iter()
            .map(|t| simplex_volume(2, &t.iter().map(|&i| nodes[i]).collect::<Vec<_>>()))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_cube_hull_volume() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push([(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        pts.push([0.5, 0.5, 0.5]);
        assert!((hull_volume(3, &pts) - 1.0).abs() < 1e-12);
        let flat = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        assert_eq!(hull_volume(3, &flat), 0.0);
    }
}
