use serde::Serialize;

use super::dual::DualSolution;
use super::shape::radical_inverse;
use crate::geom::{self, P2};
use crate::io::FrameRow;
use crate::{Error, Result};

/// Points `(1 − t)x + t·T(x)` for fixed source samples `x`.
#[derive(Debug, Clone, Serialize)]
pub struct InterpolationFrames {
    pub times: Vec<f64>,
    /// Source samples and the cell each belongs to.
    pub samples: Vec<(P2, usize)>,
    #[serde(skip)]
    pub frames: Vec<Vec<FrameRow>>,
}

/// Frames at the given times with `per_cell` Halton samples in every cell.
pub fn displacement_frames(dual: &DualSolution, times: &[f64], per_cell: usize) -> Result<InterpolationFrames> {
    if let Some(t) = times.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::Config(format!("frame time {t} is outside [0, 1]")));
    }
    if per_cell == 0 {
        return Err(Error::Config("at least one sample per cell is required".into()));
    }
    let diagram = dual.diagram()?;
    let mut samples = Vec::new();
    for (i, cell) in diagram.cells.iter().enumerate() {
        if cell.is_empty() {
            continue;
        }
        for p in cell_samples(&cell.verts, per_cell) {
            samples.push((p, i));
        }
    }
    let frames = times
        .iter()
        .map(|&t| {
            samples
                .iter()
                .map(|&(x, i)| {
                    let p = dual.sites[i];
                    FrameRow {
                        x: [(1.0 - t) * x[0] + t * p[0], (1.0 - t) * x[1] + t * p[1]],
                        cell: i,
                    }
                })
                .collect()
        })
        .collect();
    Ok(InterpolationFrames {
        times: times.to_vec(),
        samples,
        frames,
    })
}

/// Up to `count` Halton points inside a convex polygon; the centroid when none land.
fn cell_samples(poly: &[P2], count: usize) -> Vec<P2> {
    let lo = poly.iter().fold([f64::INFINITY; 2], |a, p| [a[0].min(p[0]), a[1].min(p[1])]);
    let hi = poly
        .iter()
        .fold([f64::NEG_INFINITY; 2], |a, p| [a[0].max(p[0]), a[1].max(p[1])]);
    let mut out = Vec::with_capacity(count);
    let mut k = 1u64;
    while out.len() < count && k <= 64 * count as u64 {
        let p = [
            lo[0] + (hi[0] - lo[0]) * radical_inverse(k, 2),
            lo[1] + (hi[1] - lo[1]) * radical_inverse(k, 3),
        ];
        if geom::in_convex_polygon(poly, p, 0.0) {
            out.push(p);
        }
        k += 1;
    }
    if out.is_empty() {
        out.push(geom::centroid(poly));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot::dual::{solve_dual, DualOptions};
    use crate::ot::shape::{ShapeName, ShapeSpec};

    #[test]
    fn endpoints_are_samples_and_sites() {
        let spec = ShapeSpec::new(ShapeName::SplitBall);
        let dual = solve_dual(&spec.source_polygon(), &spec.sample(100).unwrap(), &DualOptions::default()).unwrap();
        let f = displacement_frames(&dual, &[0.0, 1.0], 3).unwrap();
        for (k, &(x, i)) in f.samples.iter().enumerate() {
            assert_eq!(f.frames[0][k].x, x);
            assert_eq!(f.frames[1][k].x, dual.sites[i]);
        }
        assert!(displacement_frames(&dual, &[1.5], 3).unwrap_err().is_config());
    }
}
